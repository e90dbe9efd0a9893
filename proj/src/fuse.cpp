#include "qav/fuse.hpp"

#include <algorithm>
#include <cmath>

#include "qav/compensated_sum.hpp"
#include "qav/error.hpp"

namespace qav {

void validate(const Template& t) {
  if (t.frames.empty()) {
    throw Error(ErrorCode::empty_set, "template '" + t.template_id + "' has no frames");
  }
  const std::size_t d = t.frames.front().dim();
  if (d == 0) throw Error(ErrorCode::invalid_argument, "frame has dimension 0", 0);
  for (std::size_t i = 0; i < t.frames.size(); ++i) {
    const auto& f = t.frames[i];
    if (f.dim() != d) {
      throw Error(ErrorCode::dimension_mismatch,
                  "frame has dimension " + std::to_string(f.dim()) + ", expected " + std::to_string(d), i);
    }
    if (!std::isfinite(f.quality)) throw Error(ErrorCode::non_finite, "frame quality is not finite", i);
    if (!(f.quality > 0.0)) throw Error(ErrorCode::non_positive_quality, "frame quality <= 0", i);
    if (!std::all_of(f.direction.begin(), f.direction.end(), [](double x) { return std::isfinite(x); })) {
      throw Error(ErrorCode::non_finite, "frame direction is not finite", i);
    }
  }
}

namespace {

bool homogeneous(const Template& t) {
  const auto& first = t.frames.front();
  return std::all_of(t.frames.begin() + 1, t.frames.end(), [&](const QualityEmbedding& f) {
    return f.quality == first.quality && f.direction == first.direction;
  });
}

}  // namespace

QualityEmbedding aggregate(const Template& t) {
  validate(t);
  if (homogeneous(t)) return t.frames.front();

  const std::size_t d = t.frames.front().dim();
  std::vector<CompensatedSum> v(d);
  CompensatedSum sum_q, sum_q2;
  for (const auto& f : t.frames) {
    for (std::size_t k = 0; k < d; ++k) v[k].add(f.quality * f.direction[k]);
    sum_q.add(f.quality);
    sum_q2.add(f.quality * f.quality);
  }

  std::vector<double> dir(d);
  CompensatedSum norm2;
  for (std::size_t k = 0; k < d; ++k) {
    dir[k] = v[k].value();
    norm2.add(dir[k] * dir[k]);
  }
  const double norm = std::sqrt(norm2.value());
  if (!(norm >= kZeroNormTolerance)) {
    throw Error(ErrorCode::cancellation, "frames of template '" + t.template_id + "' cancel out");
  }
  for (double& x : dir) x /= norm;

  double quality = sum_q2.value() / sum_q.value();
  // Rounding can push the mean a hair outside the frame range.
  const auto [lo, hi] = std::minmax_element(t.frames.begin(), t.frames.end(),
      [](const QualityEmbedding& a, const QualityEmbedding& b) { return a.quality < b.quality; });
  quality = std::clamp(quality, lo->quality, hi->quality);
  return {std::move(dir), quality};
}

}  // namespace qav
