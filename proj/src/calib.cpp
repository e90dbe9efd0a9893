#include "qav/calib.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <numeric>
#include <thread>

#include "qav/error.hpp"

namespace qav {

ComparisonSet::ComparisonSet(std::vector<ScoredPair> pairs) : pairs_(std::move(pairs)) {
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    const auto& p = pairs_[i];
    if (!std::isfinite(p.raw_score) || !std::isfinite(p.q_min)) {
      throw Error(ErrorCode::non_finite, "comparison has a non-finite score or quality", i);
    }
    if (!(p.q_min > 0.0)) {
      throw Error(ErrorCode::non_positive_quality, "comparison has q_min <= 0", i);
    }
    if (p.label == Label::genuine) ++genuine_count_;
  }
}

ScoreSet ComparisonSet::raw_scores() const {
  std::vector<double> gen, imp;
  gen.reserve(genuine_count_);
  imp.reserve(imposter_count());
  for (const auto& p : pairs_) {
    (p.label == Label::genuine ? gen : imp).push_back(p.raw_score);
  }
  return ScoreSet(std::move(gen), std::move(imp));
}

ScoreSet ComparisonSet::quality_aware_scores(const WeightParams& params) const {
  const auto qa = qa_score_batch(pairs_, params);
  std::vector<double> gen, imp;
  gen.reserve(genuine_count_);
  imp.reserve(imposter_count());
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    (pairs_[i].label == Label::genuine ? gen : imp).push_back(qa[i]);
  }
  return ScoreSet(std::move(gen), std::move(imp));
}

double OmegaGrid::at(std::size_t i) const noexcept {
  if (i + 1 >= steps) return high;
  if (i == 0) return low;
  return low + (high - low) * (static_cast<double>(i) / static_cast<double>(steps - 1));
}

OmegaGrid OmegaGrid::refined(std::size_t factor) const noexcept {
  return {low, high, (steps - 1) * factor + 1};
}

void OmegaGrid::validate() const {
  if (!std::isfinite(low) || !std::isfinite(high) || !(low < high) || high > 0.0) {
    throw Error(ErrorCode::invalid_argument, "omega grid needs low < high <= 0");
  }
  if (steps < 2) {
    throw Error(ErrorCode::invalid_argument, "omega grid needs at least 2 steps");
  }
}

void CalibConfig::validate() const {
  if (!(fmr_min > 0.0 && fmr_min < fmr_max && fmr_max < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "FMR range needs 0 < fmr_min < fmr_max < 1");
  }
  if (n_fmr_points < 2) {
    throw Error(ErrorCode::invalid_argument, "need at least 2 FMR points");
  }
  omega_grid.validate();
}

unsigned default_thread_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("QAV_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return n;
}

double sigmoid(double x) noexcept { return 1.0 / (1.0 + std::exp(-x)); }

namespace {

// The single place the affine part of the scaled score is evaluated, so the
// pruning bounds below see exactly the values the sweep compares.
inline double affine_score(double omega, double s, double q) noexcept {
  return omega * q + s;
}

}  // namespace

double scaled_score(double omega, double s, double q_min, bool use_sigmoid) noexcept {
  const double x = affine_score(omega, s, q_min);
  return use_sigmoid ? sigmoid(x) : x;
}

namespace {

constexpr std::size_t kBlockSize = 8;

struct Columns {
  std::vector<double> s;
  std::vector<double> q;
};

struct Best {
  std::size_t misses = std::numeric_limits<std::size_t>::max();
  std::size_t index = 0;
  double threshold = 0.0;
};

// Fewer misses wins; on a tie the larger grid index, i.e. the weight
// closest to zero.
bool improves(std::size_t misses, std::size_t index, const Best& b) {
  return misses < b.misses || (misses == b.misses && index > b.index);
}

class WeightSweep {
 public:
  WeightSweep(const ComparisonSet& set, std::span<const double> targets,
              const OmegaGrid& grid, bool use_sigmoid)
      : grid_(grid), use_sigmoid_(use_sigmoid) {
    for (const auto& p : set.pairs()) {
      auto& col = p.label == Label::genuine ? gen_ : imp_;
      col.s.push_back(p.raw_score);
      col.q.push_back(p.q_min);
    }
    max_matches_.reserve(targets.size());
    std::size_t most = 0;
    for (double f : targets) {
      max_matches_.push_back(max_matches_at_fmr(f, imp_.s.size()));
      most = std::max(most, max_matches_.back());
    }
    keep_ = std::min(imp_.s.size(), most + 1);
  }

  std::size_t block_count() const { return (grid_.steps + kBlockSize - 1) / kBlockSize; }

  std::vector<Best> run(std::size_t first_block, std::size_t last_block) const {
    std::vector<Best> best(max_matches_.size());
    Scratch scratch;
    for (std::size_t b = first_block; b < last_block; ++b) {
      const std::size_t i0 = b * kBlockSize;
      const std::size_t i1 = std::min(grid_.steps, i0 + kBlockSize) - 1;
      select_candidates(grid_.at(i0), grid_.at(i1), scratch);
      for (std::size_t i = i0; i <= i1; ++i) evaluate(i, scratch, best);
    }
    return best;
  }

 private:
  struct Scratch {
    std::vector<double> bounds;
    std::vector<std::size_t> candidates;
    std::vector<double> top;
    std::vector<double> genuine;
    std::vector<double> thresholds;
    std::vector<std::size_t> order;
    std::vector<double> sorted_thresholds;
    std::vector<std::size_t> histogram;
  };

  // Imposters that can reach the top `keep_` scores anywhere in
  // [omega_lo, omega_hi]. Scores are monotone in omega (q > 0), so an
  // imposter whose best case stays below the keep_-th largest worst case
  // can be dropped for the whole block.
  void select_candidates(double omega_lo, double omega_hi, Scratch& sc) const {
    const std::size_t n = imp_.s.size();
    sc.candidates.clear();
    if (keep_ >= n) {
      sc.candidates.resize(n);
      std::iota(sc.candidates.begin(), sc.candidates.end(), std::size_t{0});
      return;
    }
    sc.bounds.resize(n);
    for (std::size_t j = 0; j < n; ++j) sc.bounds[j] = affine_score(omega_lo, imp_.s[j], imp_.q[j]);
    const auto kth = sc.bounds.begin() + static_cast<std::ptrdiff_t>(keep_ - 1);
    std::nth_element(sc.bounds.begin(), kth, sc.bounds.end(), std::greater<>());
    const double floor = *kth;
    for (std::size_t j = 0; j < n; ++j) {
      if (affine_score(omega_hi, imp_.s[j], imp_.q[j]) >= floor) sc.candidates.push_back(j);
    }
  }

  void evaluate(std::size_t i, Scratch& sc, std::vector<Best>& best) const {
    const double omega = grid_.at(i);

    sc.top.clear();
    for (std::size_t j : sc.candidates) sc.top.push_back(affine_score(omega, imp_.s[j], imp_.q[j]));
    const auto kth = sc.top.begin() + static_cast<std::ptrdiff_t>(keep_);
    std::nth_element(sc.top.begin(), kth - 1, sc.top.end(), std::greater<>());
    sc.top.resize(keep_);
    std::sort(sc.top.begin(), sc.top.end(), std::greater<>());
    if (use_sigmoid_) {
      for (double& x : sc.top) x = sigmoid(x);
    }

    const std::size_t nt = max_matches_.size();
    sc.thresholds.resize(nt);
    for (std::size_t k = 0; k < nt; ++k) {
      sc.thresholds[k] = threshold_from_descending(sc.top, max_matches_[k]);
    }

    // misses[k] = #{genuine < threshold[k]}, via one pass over the genuine
    // scores against the sorted thresholds.
    sc.order.resize(nt);
    std::iota(sc.order.begin(), sc.order.end(), std::size_t{0});
    std::sort(sc.order.begin(), sc.order.end(),
              [&](std::size_t a, std::size_t b) { return sc.thresholds[a] < sc.thresholds[b]; });
    sc.sorted_thresholds.resize(nt);
    for (std::size_t r = 0; r < nt; ++r) sc.sorted_thresholds[r] = sc.thresholds[sc.order[r]];
    sc.histogram.assign(nt + 1, 0);
    for (std::size_t g = 0; g < gen_.s.size(); ++g) {
      const double x = scaled_score(omega, gen_.s[g], gen_.q[g], use_sigmoid_);
      const auto pos = std::upper_bound(sc.sorted_thresholds.begin(), sc.sorted_thresholds.end(), x) -
                       sc.sorted_thresholds.begin();
      ++sc.histogram[static_cast<std::size_t>(pos)];
    }
    std::size_t running = 0;
    for (std::size_t r = 0; r < nt; ++r) {
      running += sc.histogram[r];
      const std::size_t k = sc.order[r];
      if (improves(running, i, best[k])) best[k] = {running, i, sc.thresholds[k]};
    }
  }

  OmegaGrid grid_;
  bool use_sigmoid_;
  Columns gen_;
  Columns imp_;
  std::vector<std::size_t> max_matches_;
  std::size_t keep_ = 0;
};

void check_sweep_inputs(const ComparisonSet& set, std::span<const double> targets) {
  if (set.genuine_count() < 2) {
    throw Error(ErrorCode::empty_set, "calibration needs at least two genuine comparisons");
  }
  if (set.imposter_count() == 0) {
    throw Error(ErrorCode::empty_set, "calibration needs imposter comparisons");
  }
  const double floor = 1.0 / static_cast<double>(set.imposter_count());
  for (std::size_t k = 0; k < targets.size(); ++k) {
    if (!(targets[k] > 0.0 && targets[k] < 1.0)) {
      throw Error(ErrorCode::invalid_argument, "FMR target must lie in (0, 1)", k);
    }
    if (targets[k] < floor) {
      throw Error(ErrorCode::insufficient_imposters,
                  "FMR target " + std::to_string(targets[k]) + " is below 1/" +
                      std::to_string(set.imposter_count()) + " imposter comparisons",
                  k);
    }
  }
}

}  // namespace

std::vector<WeightOptimum> optimal_weights(const ComparisonSet& set,
                                           std::span<const double> fmr_targets,
                                           const OmegaGrid& grid, bool use_sigmoid,
                                           unsigned threads) {
  grid.validate();
  check_sweep_inputs(set, fmr_targets);
  const WeightSweep sweep(set, fmr_targets, grid, use_sigmoid);

  const std::size_t blocks = sweep.block_count();
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, blocks);
  std::vector<std::vector<Best>> partial(workers);
  if (workers == 1) {
    partial[0] = sweep.run(0, blocks);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        partial[w] = sweep.run(blocks * w / workers, blocks * (w + 1) / workers);
      });
    }
    for (auto& t : pool) t.join();
  }

  std::vector<WeightOptimum> out(fmr_targets.size());
  const double ng = static_cast<double>(set.genuine_count());
  for (std::size_t k = 0; k < out.size(); ++k) {
    Best best;
    for (const auto& p : partial) {
      if (improves(p[k].misses, p[k].index, best)) best = p[k];
    }
    out[k] = {fmr_targets[k], grid.at(best.index), best.threshold,
              static_cast<double>(best.misses) / ng, best.misses};
  }
  return out;
}

WeightOptimum optimal_weight_at_fmr(const ComparisonSet& set, double fmr_target,
                                    const CalibConfig& cfg) {
  const double targets[] = {fmr_target};
  const unsigned threads = cfg.threads ? cfg.threads : default_thread_count();
  return optimal_weights(set, targets, cfg.omega_grid, cfg.use_sigmoid, threads).front();
}

LinearFit fit_line(std::span<const LinePoint> points) {
  if (points.size() < 2) {
    throw Error(ErrorCode::degenerate_points, "line fit needs at least two points");
  }
  const double n = static_cast<double>(points.size());
  double sum_t = 0.0, sum_w = 0.0;
  for (const auto& p : points) {
    sum_t += p.t;
    sum_w += p.omega;
  }
  LinearFit fit;
  fit.mean_t = sum_t / n;
  fit.mean_omega = sum_w / n;

  double sxy = 0.0, sxx = 0.0;
  for (const auto& p : points) {
    const double dt = p.t - fit.mean_t;
    sxy += dt * (p.omega - fit.mean_omega);
    sxx += dt * dt;
  }
  if (!(sxx > 0.0)) {
    throw Error(ErrorCode::degenerate_points, "all thresholds are equal");
  }
  const double beta = sxy / sxx;
  const double alpha = beta * fit.mean_t - fit.mean_omega;
  fit.params = {alpha, beta};

  double ss_res = 0.0, ss_tot = 0.0;
  for (const auto& p : points) {
    const double r = p.omega - (beta * p.t - alpha);
    const double d = p.omega - fit.mean_omega;
    ss_res += r * r;
    ss_tot += d * d;
  }
  // Constant omega is fitted exactly by the flat line.
  fit.r2 = ss_tot > 0.0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 1.0;
  return fit;
}

std::vector<double> fmr_targets(const CalibConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.n_fmr_points;
  std::vector<double> out(n);
  const double log_hi = std::log10(cfg.fmr_max);
  const double log_lo = std::log10(cfg.fmr_min);
  for (std::size_t k = 0; k < n; ++k) {
    const double frac = static_cast<double>(k) / static_cast<double>(n - 1);
    out[k] = std::pow(10.0, log_hi + (log_lo - log_hi) * frac);
  }
  out.front() = cfg.fmr_max;
  out.back() = cfg.fmr_min;
  return out;
}

CalibrationResult calibrate(const ComparisonSet& set, const CalibConfig& cfg) {
  const auto targets = fmr_targets(cfg);
  const unsigned threads = cfg.threads ? cfg.threads : default_thread_count();
  const auto optima = optimal_weights(set, targets, cfg.omega_grid, cfg.use_sigmoid, threads);

  CalibrationResult result;
  result.use_sigmoid = cfg.use_sigmoid;
  std::vector<LinePoint> line;
  line.reserve(optima.size());
  for (const auto& o : optima) {
    result.points.push_back({o.fmr_target, o.threshold, o.omega, o.fnmr});
    line.push_back({o.threshold, o.omega});
  }
  const auto fit = fit_line(line);
  result.params = fit.params;
  result.fit_r2 = fit.r2;
  result.mean_t = fit.mean_t;
  result.mean_omega = fit.mean_omega;

  const double recommended = 10.0 / cfg.fmr_min;
  if (static_cast<double>(set.imposter_count()) < recommended) {
    result.warnings.push_back("only " + std::to_string(set.imposter_count()) +
                              " imposter comparisons; the lowest FMR target rests on fewer "
                              "than 10 imposter scores");
  }
  if (!(result.params.beta > 0.0)) {
    result.warnings.push_back("fitted beta is not positive; the weight does not rise with score");
  }
  return result;
}

}  // namespace qav
