#include "qav/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "qav/error.hpp"

namespace qav {

namespace {

void require_finite(const std::vector<double>& v, const char* side) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw Error(ErrorCode::non_finite, std::string(side) + " score is not finite", i);
    }
  }
}

void require_non_empty(std::span<const double> v, const char* side) {
  if (v.empty()) {
    throw Error(ErrorCode::empty_set, std::string("no ") + side + " scores");
  }
}

// Number of values >= t in an ascending range.
std::size_t count_at_or_above(std::span<const double> sorted, double t) {
  return static_cast<std::size_t>(
      sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), t));
}

std::size_t count_below(std::span<const double> sorted, double t) {
  return static_cast<std::size_t>(
      std::lower_bound(sorted.begin(), sorted.end(), t) - sorted.begin());
}

}  // namespace

ScoreSet::ScoreSet(std::vector<double> genuine, std::vector<double> imposter)
    : genuine_(std::move(genuine)), imposter_(std::move(imposter)) {
  require_finite(genuine_, "genuine");
  require_finite(imposter_, "imposter");
  std::sort(genuine_.begin(), genuine_.end());
  std::sort(imposter_.begin(), imposter_.end());
}

double fmr_at(double t, const ScoreSet& scores) {
  const auto imp = scores.imposter();
  require_non_empty(imp, "imposter");
  return static_cast<double>(count_at_or_above(imp, t)) /
         static_cast<double>(imp.size());
}

double fnmr_at(double t, const ScoreSet& scores) {
  const auto gen = scores.genuine();
  require_non_empty(gen, "genuine");
  return static_cast<double>(count_below(gen, t)) / static_cast<double>(gen.size());
}

std::size_t max_matches_at_fmr(double target, std::size_t n) {
  if (n == 0 || !(target >= 0.0)) return 0;
  const double dn = static_cast<double>(n);
  auto m = static_cast<std::size_t>(std::min(std::floor(target * dn), dn));
  // floor(target * n) can be off by one after rounding; settle on the
  // exact comparison the FMR itself uses.
  while (m > 0 && static_cast<double>(m) / dn > target) --m;
  while (m < n && static_cast<double>(m + 1) / dn <= target) ++m;
  return m;
}

double threshold_from_descending(std::span<const double> top_desc,
                                 std::size_t max_matches) {
  if (top_desc.empty()) {
    throw Error(ErrorCode::empty_set, "no imposter scores");
  }
  const std::size_t m = std::min(max_matches, top_desc.size());
  if (m == 0) return top_desc.front() + kThresholdEpsilon;
  const double v = top_desc[m - 1];
  const bool tie_beyond = m < top_desc.size() && top_desc[m] == v;
  if (!tie_beyond) return v;
  // Every copy of v would be accepted, which is more than m; step up to the
  // next larger distinct score.
  std::size_t first = m - 1;
  while (first > 0 && top_desc[first - 1] == v) --first;
  return first == 0 ? top_desc.front() + kThresholdEpsilon : top_desc[first - 1];
}

double threshold_at_fmr(double target, const ScoreSet& scores) {
  if (!(target > 0.0 && target < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "FMR target must lie in (0, 1)");
  }
  const auto imp = scores.imposter();
  require_non_empty(imp, "imposter");
  const std::size_t m = max_matches_at_fmr(target, imp.size());
  const std::size_t keep = std::min(imp.size(), m + 1);
  std::vector<double> top(imp.rbegin(), imp.rbegin() + static_cast<std::ptrdiff_t>(keep));
  return threshold_from_descending(top, m);
}

EerResult eer(const ScoreSet& scores) {
  const auto gen = scores.genuine();
  const auto imp = scores.imposter();
  require_non_empty(gen, "genuine");
  require_non_empty(imp, "imposter");

  std::vector<double> candidates;
  candidates.reserve(gen.size() + imp.size());
  std::merge(gen.begin(), gen.end(), imp.begin(), imp.end(),
             std::back_inserter(candidates));
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  // |a/ni - b/ng| compared exactly as |a*ng - b*ni|.
  const auto ng = static_cast<std::int64_t>(gen.size());
  const auto ni = static_cast<std::int64_t>(imp.size());
  std::int64_t best_gap = -1;
  std::size_t best_fa = 0, best_fr = 0;
  double best_t = candidates.front();
  for (double t : candidates) {
    const auto fa = count_at_or_above(imp, t);
    const auto fr = count_below(gen, t);
    const std::int64_t gap = std::llabs(static_cast<std::int64_t>(fa) * ng -
                                        static_cast<std::int64_t>(fr) * ni);
    if (best_gap < 0 || gap < best_gap) {
      best_gap = gap;
      best_fa = fa;
      best_fr = fr;
      best_t = t;
    }
  }
  const double fmr = static_cast<double>(best_fa) / static_cast<double>(ni);
  const double fnmr = static_cast<double>(best_fr) / static_cast<double>(ng);
  return {(fmr + fnmr) / 2.0, best_t};
}

double roc_auc(const ScoreSet& scores) {
  const auto gen = scores.genuine();
  const auto imp = scores.imposter();
  require_non_empty(gen, "genuine");
  require_non_empty(imp, "imposter");
  // Twice the Mann-Whitney U statistic, kept integral.
  std::uint64_t twice_u = 0;
  for (double g : gen) {
    const auto lo = std::lower_bound(imp.begin(), imp.end(), g);
    const auto hi = std::upper_bound(lo, imp.end(), g);
    twice_u += 2 * static_cast<std::uint64_t>(lo - imp.begin()) +
               static_cast<std::uint64_t>(hi - lo);
  }
  return static_cast<double>(twice_u) /
         (2.0 * static_cast<double>(gen.size()) * static_cast<double>(imp.size()));
}

std::vector<RocPoint> roc_curve(const ScoreSet& scores) {
  const auto gen = scores.genuine();
  const auto imp = scores.imposter();
  require_non_empty(gen, "genuine");
  require_non_empty(imp, "imposter");
  std::vector<double> candidates;
  std::merge(gen.begin(), gen.end(), imp.begin(), imp.end(),
             std::back_inserter(candidates));
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  std::vector<RocPoint> out;
  out.reserve(candidates.size());
  const double ng = static_cast<double>(gen.size());
  const double ni = static_cast<double>(imp.size());
  for (double t : candidates) {
    out.push_back({t, static_cast<double>(count_at_or_above(imp, t)) / ni,
                   static_cast<double>(count_below(gen, t)) / ng});
  }
  return out;
}

VerificationReport evaluate(const ScoreSet& scores,
                            std::span<const double> fmr_targets) {
  VerificationReport report;
  const auto e = eer(scores);
  report.eer = e.eer;
  report.eer_threshold = e.threshold;
  report.auc = roc_auc(scores);
  report.operating_points.reserve(fmr_targets.size());
  for (double f : fmr_targets) {
    const double t = threshold_at_fmr(f, scores);
    report.operating_points.push_back({f, t, fmr_at(t, scores), fnmr_at(t, scores)});
  }
  return report;
}

}  // namespace qav
