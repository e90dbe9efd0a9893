#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace qav {

// Added to the highest imposter score when no observed score can reach the
// requested FMR. The resulting operating point has FMR 0.
inline constexpr double kThresholdEpsilon = 1e-9;

// Genuine and imposter scores, each sorted ascending once at construction.
// A comparison is a match when score >= threshold.
class ScoreSet {
 public:
  ScoreSet() = default;
  // Throws NonFinite on NaN/inf scores. Empty sides are allowed here; each
  // metric checks the side it needs and throws EmptySet.
  ScoreSet(std::vector<double> genuine, std::vector<double> imposter);

  std::span<const double> genuine() const noexcept { return genuine_; }
  std::span<const double> imposter() const noexcept { return imposter_; }

 private:
  std::vector<double> genuine_;
  std::vector<double> imposter_;
};

// Fraction of imposter scores >= t.
double fmr_at(double t, const ScoreSet& scores);
// Fraction of genuine scores < t.
double fnmr_at(double t, const ScoreSet& scores);

// Largest match count m with m / n <= target, i.e. the most imposters an
// operating point at `target` may accept.
std::size_t max_matches_at_fmr(double target, std::size_t n);

// Smallest observed score t with at most `max_matches` scores >= t, given
// the highest scores sorted descending. `top_desc` must hold at least
// max_matches + 1 values, or every score. Falls back to
// top_desc[0] + kThresholdEpsilon when no observed score qualifies.
double threshold_from_descending(std::span<const double> top_desc,
                                 std::size_t max_matches);

// Smallest observed imposter score t with fmr_at(t) <= target. target must
// lie in (0, 1).
double threshold_at_fmr(double target, const ScoreSet& scores);

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
};

// Sweeps every observed score as a threshold and picks the one minimising
// |FMR - FNMR| (ties go to the smaller threshold); eer is the midpoint there.
EerResult eer(const ScoreSet& scores);

// P(genuine > imposter) + P(genuine == imposter) / 2.
double roc_auc(const ScoreSet& scores);

struct RocPoint {
  double threshold = 0.0;
  double fmr = 0.0;
  double fnmr = 0.0;
};

// One point per distinct observed score, ascending in threshold.
std::vector<RocPoint> roc_curve(const ScoreSet& scores);

struct OperatingPoint {
  double fmr_target = 0.0;
  double threshold = 0.0;
  double fmr = 0.0;   // achieved
  double fnmr = 0.0;
};

struct VerificationReport {
  double eer = 0.0;
  double eer_threshold = 0.0;
  double auc = 0.0;
  std::vector<OperatingPoint> operating_points;  // in the order requested
};

VerificationReport evaluate(const ScoreSet& scores,
                            std::span<const double> fmr_targets);

}  // namespace qav
