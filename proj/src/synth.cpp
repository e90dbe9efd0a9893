#include "qav/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>

#include "qav/dataio.hpp"
#include "qav/error.hpp"

namespace qav {

void SynthConfig::validate() const {
  if (n_subjects < 1 || samples_per_subject < 1 || d < 2) {
    throw Error(ErrorCode::invalid_argument, "need n_subjects >= 1, samples_per_subject >= 1, d >= 2");
  }
  if (!(q_low > 0.0) || !(q_low <= q_high) || !std::isfinite(q_high)) {
    throw Error(ErrorCode::invalid_argument, "quality range needs 0 < q_low <= q_high");
  }
  for (double x : {genuine_quality_slope, noise_sd, base_angle}) {
    if (!std::isfinite(x) || x < 0.0) {
      throw Error(ErrorCode::invalid_argument, "slope, noise and base angle must be finite and >= 0");
    }
  }
}

SynthConfig SynthConfig::planted(std::uint64_t seed) {
  SynthConfig c;
  c.seed = seed;
  c.d = 30;
  c.q_low = 14.0;
  c.q_high = 42.0;
  c.genuine_quality_slope = 0.025 / 0.7;
  c.noise_sd = 0.0;
  c.base_angle = 0.05;
  return c;
}

SynthConfig SynthConfig::no_signal(std::uint64_t seed) {
  SynthConfig c;
  c.seed = seed;
  c.d = 30;
  c.q_low = 30.0;
  c.q_high = 30.0;
  c.genuine_quality_slope = 0.0;
  c.noise_sd = 0.3;
  c.base_angle = 0.6;
  return c;
}

namespace {

// std distributions are implementation-defined; these are not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // [0, 1)
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (spare_) {
      spare_ = false;
      return cached_;
    }
    double u1 = uniform();
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(a);
    spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 engine_;
  bool spare_ = false;
  double cached_ = 0.0;
};

std::vector<double> random_unit(Rng& rng, std::size_t d) {
  std::vector<double> v(d);
  double norm = 0.0;
  while (!(norm > 1e-6)) {
    for (double& x : v) x = rng.normal();
    norm = l2_norm(v);
  }
  for (double& x : v) x /= norm;
  return v;
}

// Unit vector orthogonal to the unit vector c.
std::vector<double> random_orthogonal(Rng& rng, const std::vector<double>& c) {
  std::vector<double> u(c.size());
  double norm = 0.0;
  while (!(norm > 1e-6)) {
    for (double& x : u) x = rng.normal();
    double dot = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) dot += u[k] * c[k];
    for (std::size_t k = 0; k < c.size(); ++k) u[k] -= dot * c[k];
    norm = l2_norm(u);
  }
  for (double& x : u) x /= norm;
  return u;
}

std::string padded(char prefix, std::size_t value, std::size_t count) {
  const int width = static_cast<int>(std::to_string(count > 0 ? count - 1 : 0).size());
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%0*zu", prefix, width, value);
  return buf;
}

}  // namespace

std::vector<Embedding> generate(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  std::vector<std::vector<double>> centres;
  centres.reserve(cfg.n_subjects);
  for (std::size_t k = 0; k < cfg.n_subjects; ++k) centres.push_back(random_unit(rng, cfg.d));

  std::vector<Embedding> out;
  out.reserve(cfg.n_subjects * cfg.samples_per_subject);
  const double per = static_cast<double>(cfg.samples_per_subject);
  for (std::size_t k = 0; k < cfg.n_subjects; ++k) {
    const auto& c = centres[k];
    const std::string subject = padded('p', k, cfg.n_subjects);
    for (std::size_t j = 0; j < cfg.samples_per_subject; ++j) {
      // One jittered draw per equal-width stratum of the quality range.
      const double q = cfg.q_low + (cfg.q_high - cfg.q_low) * (static_cast<double>(j) + rng.uniform()) / per;
      const double noise = rng.normal();
      const double angle = std::max(
          0.0, cfg.base_angle + cfg.genuine_quality_slope * (cfg.q_high - q) + cfg.noise_sd * noise);
      const auto u = random_orthogonal(rng, c);
      const double ca = std::cos(angle), sa = std::sin(angle);

      Embedding e;
      e.sample_id = subject;
      e.sample_id[0] = 's';
      e.sample_id += "_" + padded('x', j, cfg.samples_per_subject).substr(1);
      e.subject_id = subject;
      e.vector.resize(cfg.d);
      for (std::size_t i = 0; i < cfg.d; ++i) e.vector[i] = q * (ca * c[i] + sa * u[i]);
      out.push_back(std::move(e));
    }
  }
  return out;
}

OracleSweep brute_force_sweep(const ComparisonSet& set, std::span<const double> fmr_targets,
                              const OmegaGrid& grid, bool use_sigmoid, std::size_t stride) {
  grid.validate();
  if (stride == 0) throw Error(ErrorCode::invalid_argument, "stride must be positive");
  std::vector<double> gs, gq, is, iq;
  for (const auto& p : set.pairs()) {
    (p.label == Label::genuine ? gs : is).push_back(p.raw_score);
    (p.label == Label::genuine ? gq : iq).push_back(p.q_min);
  }
  const std::size_t ni = is.size();
  if (gs.empty() || ni == 0) throw Error(ErrorCode::empty_set, "oracle needs both labels");

  // m = largest count with m / ni <= target.
  std::vector<std::size_t> allowed;
  std::size_t keep = 0;
  for (double f : fmr_targets) {
    std::size_t m = static_cast<std::size_t>(std::floor(f * static_cast<double>(ni)));
    while (m > 0 && static_cast<double>(m) / static_cast<double>(ni) > f) --m;
    while (m < ni && static_cast<double>(m + 1) / static_cast<double>(ni) <= f) ++m;
    allowed.push_back(m);
    keep = std::max(keep, std::min(ni, m + 1));
  }

  const auto scale = [&](double w, double s, double q) {
    const double x = w * q + s;
    return use_sigmoid ? 1.0 / (1.0 + std::exp(-x)) : x;
  };

  OracleSweep out{std::vector<OraclePoint>(fmr_targets.size()), std::vector<OraclePoint>(fmr_targets.size())};
  for (auto& b : out.best) b.misses = gs.size() + 1;
  for (auto& b : out.strided) b.misses = gs.size() + 1;
  const auto offer = [](OraclePoint& b, const OraclePoint& c) {
    if (c.misses < b.misses || (c.misses == b.misses && c.omega > b.omega)) b = c;
  };
  std::vector<double> imp(ni), gen(gs.size());
  for (std::size_t i = 0; i < grid.steps; ++i) {
    const double w = grid.at(i);
    for (std::size_t j = 0; j < ni; ++j) imp[j] = scale(w, is[j], iq[j]);
    std::nth_element(imp.begin(), imp.begin() + static_cast<std::ptrdiff_t>(keep - 1), imp.end(),
                     std::greater<>());
    std::vector<double> top(imp.begin(), imp.begin() + static_cast<std::ptrdiff_t>(keep));
    std::sort(top.begin(), top.end(), std::greater<>());
    for (std::size_t g = 0; g < gs.size(); ++g) gen[g] = scale(w, gs[g], gq[g]);
    std::sort(gen.begin(), gen.end());

    for (std::size_t k = 0; k < fmr_targets.size(); ++k) {
      // Smallest observed score whose match count stays within allowed[k];
      // match counts only grow down the descending list.
      const auto count_at = [&](std::size_t r) {
        return static_cast<std::size_t>(
            std::upper_bound(top.begin(), top.end(), top[r], std::greater<>()) - top.begin());
      };
      std::size_t lo = 0, hi = top.size();  // first r with count_at(r) > allowed
      while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (count_at(mid) > allowed[k]) hi = mid;
        else lo = mid + 1;
      }
      const double t = lo == 0 ? top.front() + kThresholdEpsilon : top[lo - 1];
      const auto misses = static_cast<std::size_t>(std::lower_bound(gen.begin(), gen.end(), t) - gen.begin());
      const OraclePoint c{fmr_targets[k], t, w, misses,
                          static_cast<double>(misses) / static_cast<double>(gs.size())};
      offer(out.best[k], c);
      if (i % stride == 0) offer(out.strided[k], c);
    }
  }
  return out;
}

std::vector<OraclePoint> planted_oracle(const SynthConfig& cfg,
                                        std::span<const double> fmr_targets,
                                        const CalibConfig& calib) {
  const auto samples = generate(cfg);
  const auto set = build_comparison_set(samples, all_pairs(samples));
  return brute_force_weights(set, fmr_targets, calib.omega_grid.refined(10), calib.use_sigmoid);
}

}  // namespace qav
