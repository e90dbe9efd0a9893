#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qav {

// Norms below this are treated as zero: quality has no meaning there.
inline constexpr double kZeroNormTolerance = 1e-12;

// A raw embedding as produced by a magnitude-aware recognition model. The
// L2 norm of `vector` is the sample quality, its direction the identity.
struct Embedding {
  std::vector<double> vector;
  std::string sample_id;
  std::optional<std::string> subject_id;

  std::size_t dim() const noexcept { return vector.size(); }
};

// An embedding split into its unit direction and its magnitude.
struct QualityEmbedding {
  std::vector<double> direction;
  double quality = 0.0;

  std::size_t dim() const noexcept { return direction.size(); }
};

// Throws NonFinite, ZeroNorm, or InvalidArgument for an empty vector.
void validate(std::span<const double> vector);
inline void validate(const Embedding& e) { validate(e.vector); }

double l2_norm(std::span<const double> vector);

QualityEmbedding decompose(std::span<const double> vector);
inline QualityEmbedding decompose(const Embedding& e) { return decompose(e.vector); }

// quality * direction
std::vector<double> recompose(const QualityEmbedding& q);

// Cosine similarity of two raw vectors, clamped to [-1, 1]. Dot product and
// both squared norms are accumulated with compensated summation in a single
// pass, so cosine(a, b) == cosine(b, a) bit for bit.
double cosine(std::span<const double> a, std::span<const double> b);
inline double cosine(const Embedding& a, const Embedding& b) {
  return cosine(a.vector, b.vector);
}

}  // namespace qav
