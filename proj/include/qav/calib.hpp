#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "qav/metrics.hpp"
#include "qav/qscore.hpp"

namespace qav {

// Genuine and imposter comparisons with their minimum pair qualities.
class ComparisonSet {
 public:
  ComparisonSet() = default;
  // Throws NonPositiveQuality / NonFinite with the offending index.
  explicit ComparisonSet(std::vector<ScoredPair> pairs);

  std::span<const ScoredPair> pairs() const noexcept { return pairs_; }
  std::size_t size() const noexcept { return pairs_.size(); }
  std::size_t genuine_count() const noexcept { return genuine_count_; }
  std::size_t imposter_count() const noexcept { return pairs_.size() - genuine_count_; }

  ScoreSet raw_scores() const;
  ScoreSet quality_aware_scores(const WeightParams& p) const;

 private:
  std::vector<ScoredPair> pairs_;
  std::size_t genuine_count_ = 0;
};

// Evenly spaced candidate weights from low to high, both inclusive.
struct OmegaGrid {
  double low = -0.2;
  double high = 0.0;
  std::size_t steps = 2001;

  double at(std::size_t i) const noexcept;
  // Same interval with `factor` times the spacing resolution; every point
  // of this grid is also a point of the refined one.
  OmegaGrid refined(std::size_t factor) const noexcept;
  void validate() const;
};

struct CalibConfig {
  double fmr_max = 1e-2;
  double fmr_min = 1e-5;
  std::size_t n_fmr_points = 40;
  OmegaGrid omega_grid;
  bool use_sigmoid = true;
  unsigned threads = 0;  // 0: default_thread_count()

  void validate() const;
};

// Hardware concurrency, capped by the QAV_THREADS environment variable.
unsigned default_thread_count();

double sigmoid(double x) noexcept;

// sigmoid(omega * q_min + s), or the bare affine score without the sigmoid.
double scaled_score(double omega, double s, double q_min, bool use_sigmoid) noexcept;

struct WeightOptimum {
  double fmr_target = 0.0;
  double omega = 0.0;
  double threshold = 0.0;  // in scaled-score units
  double fnmr = 0.0;
  std::size_t misses = 0;  // genuine pairs below threshold
};

// For every FMR target: the grid weight whose scaled scores give the lowest
// FNMR at the threshold realising that FMR on the scaled imposter scores.
// Ties go to the weight closest to 0. Results follow the order of
// `fmr_targets` and do not depend on `threads`.
std::vector<WeightOptimum> optimal_weights(const ComparisonSet& set,
                                           std::span<const double> fmr_targets,
                                           const OmegaGrid& grid, bool use_sigmoid,
                                           unsigned threads = 1);

WeightOptimum optimal_weight_at_fmr(const ComparisonSet& set, double fmr_target,
                                    const CalibConfig& cfg);

struct LinePoint {
  double t = 0.0;
  double omega = 0.0;
};

struct LinearFit {
  WeightParams params;
  double r2 = 0.0;
  double mean_t = 0.0;
  double mean_omega = 0.0;
};

// Least-squares line omega = beta * t - alpha. Throws DegeneratePoints
// with fewer than two points or when every t is equal.
LinearFit fit_line(std::span<const LinePoint> points);
inline WeightParams fit_linear(std::span<const LinePoint> points) {
  return fit_line(points).params;
}

struct CalibrationPoint {
  double fmr_target = 0.0;
  double threshold = 0.0;
  double omega_opt = 0.0;
  double fnmr = 0.0;

  friend bool operator==(const CalibrationPoint&, const CalibrationPoint&) = default;
};

struct CalibrationResult {
  WeightParams params;
  std::vector<CalibrationPoint> points;  // fmr_max first
  double fit_r2 = 0.0;
  double mean_t = 0.0;
  double mean_omega = 0.0;
  bool use_sigmoid = true;
  std::vector<std::string> warnings;

  friend bool operator==(const CalibrationResult&, const CalibrationResult&) = default;
};

// Log-spaced targets from fmr_max down to fmr_min, endpoints exact.
std::vector<double> fmr_targets(const CalibConfig& cfg);

CalibrationResult calibrate(const ComparisonSet& set, const CalibConfig& cfg);

}  // namespace qav
