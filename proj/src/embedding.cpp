#include "qav/embedding.hpp"

#include <algorithm>
#include <cmath>

#include "qav/compensated_sum.hpp"
#include "qav/error.hpp"

namespace qav {

void validate(std::span<const double> vector) {
  if (vector.empty()) {
    throw Error(ErrorCode::invalid_argument, "embedding has dimension 0");
  }
  for (std::size_t i = 0; i < vector.size(); ++i) {
    if (!std::isfinite(vector[i])) {
      throw Error(ErrorCode::non_finite, "embedding component is not finite", i);
    }
  }
  if (l2_norm(vector) < kZeroNormTolerance) {
    throw Error(ErrorCode::zero_norm, "embedding has zero norm");
  }
}

double l2_norm(std::span<const double> vector) {
  CompensatedSum sq;
  for (double x : vector) sq.add(x * x);
  return std::sqrt(sq.value());
}

QualityEmbedding decompose(std::span<const double> vector) {
  validate(vector);
  QualityEmbedding out;
  out.quality = l2_norm(vector);
  out.direction.resize(vector.size());
  std::transform(vector.begin(), vector.end(), out.direction.begin(),
                 [q = out.quality](double x) { return x / q; });
  return out;
}

std::vector<double> recompose(const QualityEmbedding& q) {
  std::vector<double> out(q.direction.size());
  std::transform(q.direction.begin(), q.direction.end(), out.begin(),
                 [s = q.quality](double x) { return s * x; });
  return out;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::dimension_mismatch,
                "cosine of vectors with dimensions " + std::to_string(a.size()) +
                    " and " + std::to_string(b.size()));
  }
  CompensatedSum dot, aa, bb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i]) || !std::isfinite(b[i])) {
      throw Error(ErrorCode::non_finite, "embedding component is not finite", i);
    }
    dot.add(a[i] * b[i]);
    aa.add(a[i] * a[i]);
    bb.add(b[i] * b[i]);
  }
  const double na = std::sqrt(aa.value());
  const double nb = std::sqrt(bb.value());
  if (na < kZeroNormTolerance || nb < kZeroNormTolerance) {
    throw Error(ErrorCode::zero_norm, "cosine of a zero-norm embedding");
  }
  return std::clamp(dot.value() / (na * nb), -1.0, 1.0);
}

}  // namespace qav
