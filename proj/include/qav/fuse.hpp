#pragma once

#include <string>
#include <vector>

#include "qav/embedding.hpp"

namespace qav {

// Frames of one video or sample set, fused into a single embedding.
struct Template {
  std::vector<QualityEmbedding> frames;
  std::string template_id;
};

// Throws EmptySet, DimensionMismatch, NonPositiveQuality or NonFinite.
void validate(const Template& t);

// direction = v / |v| with v = sum_i q_i * direction_i, and quality
// sum_i q_i^2 / sum_i q_i. A template whose frames are all identical comes
// back unchanged. Throws CancellationError when |v| < kZeroNormTolerance.
QualityEmbedding aggregate(const Template& t);

}  // namespace qav
