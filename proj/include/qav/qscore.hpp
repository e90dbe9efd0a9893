#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qav {

// Parameters of the clamped linear quality weight
//   omega(s) = min{0, beta * s - alpha}.
// Nothing is enforced at construction; calibration flags beta <= 0.
struct WeightParams {
  double alpha = 0.0;
  double beta = 0.0;

  // Score at which the weight reaches zero. Infinite or NaN when beta == 0.
  double zero_crossing() const noexcept { return alpha / beta; }

  friend bool operator==(const WeightParams&, const WeightParams&) = default;
};

enum class Label { genuine, imposter };

std::string_view to_string(Label label) noexcept;
// Accepts "genuine" / "imposter" (also "impostor"); throws Parse otherwise.
Label parse_label(std::string_view text);

// One comparison: the raw cosine and the lower of the two sample qualities.
struct ScoredPair {
  double raw_score = 0.0;
  double q_min = 0.0;
  Label label = Label::imposter;
  std::string id_a;
  std::string id_b;
};

// min{0, beta * s - alpha}; never positive. Throws NonFinite.
double weight(double s, const WeightParams& p);

// omega(s) * min{q1, q2} + s. Throws NonPositiveQuality or NonFinite.
double qa_score(double s, double q1, double q2, const WeightParams& p);

// Element i is qa_score(pairs[i].raw_score, q_min, q_min, p). Errors carry
// the index of the offending pair.
std::vector<double> qa_score_batch(std::span<const ScoredPair> pairs,
                                   const WeightParams& p);

// Reference constants for the 100-layer model, learned on Adience.
inline constexpr WeightParams kReferenceParams100{0.077428, 0.125926};

}  // namespace qav
