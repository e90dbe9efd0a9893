#pragma once

// Slow, direct reference implementations used to check the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "qav/calib.hpp"
#include "qav/metrics.hpp"

namespace oracle {

inline double fmr(double t, std::span<const double> imp) {
  std::size_t n = 0;
  for (double x : imp) n += x >= t;
  return static_cast<double>(n) / static_cast<double>(imp.size());
}

inline double fnmr(double t, std::span<const double> gen) {
  std::size_t n = 0;
  for (double x : gen) n += x < t;
  return static_cast<double>(n) / static_cast<double>(gen.size());
}

// Smallest observed imposter score t with fmr(t) <= target, else max + eps.
inline double threshold_at_fmr(double target, std::span<const double> imp) {
  double best = std::numeric_limits<double>::infinity();
  for (double t : imp) {
    if (fmr(t, imp) <= target) best = std::min(best, t);
  }
  if (std::isinf(best)) return *std::max_element(imp.begin(), imp.end()) + qav::kThresholdEpsilon;
  return best;
}

struct Eer {
  double eer;
  double threshold;
};

// Every observed score as a threshold; the gap |fmr - fnmr| is compared as
// an exact fraction. The smaller threshold wins ties.
inline Eer eer(std::span<const double> gen, std::span<const double> imp) {
  std::vector<double> cand(gen.begin(), gen.end());
  cand.insert(cand.end(), imp.begin(), imp.end());
  const auto ng = static_cast<long long>(gen.size());
  const auto ni = static_cast<long long>(imp.size());
  long long best_gap = std::numeric_limits<long long>::max();
  double best_t = 0.0;
  long long best_a = 0, best_b = 0;
  for (double t : cand) {
    long long a = 0, b = 0;
    for (double x : imp) a += x >= t;
    for (double x : gen) b += x < t;
    const long long gap = std::llabs(a * ng - b * ni);
    if (gap < best_gap || (gap == best_gap && t < best_t)) {
      best_gap = gap;
      best_t = t;
      best_a = a;
      best_b = b;
    }
  }
  const double f = static_cast<double>(best_a) / static_cast<double>(ni);
  const double r = static_cast<double>(best_b) / static_cast<double>(ng);
  return {(f + r) / 2.0, best_t};
}

inline double auc(std::span<const double> gen, std::span<const double> imp) {
  double wins = 0.0;
  for (double g : gen) {
    for (double i : imp) wins += g > i ? 1.0 : (g == i ? 0.5 : 0.0);
  }
  return wins / (static_cast<double>(gen.size()) * static_cast<double>(imp.size()));
}

// Least squares omega = c0 + c1 * t from the 2x2 normal equations, solved
// by Cramer's rule in long double.
inline qav::WeightParams normal_equations(std::span<const qav::LinePoint> pts) {
  long double n = 0, st = 0, stt = 0, sw = 0, stw = 0;
  for (const auto& p : pts) {
    n += 1;
    st += p.t;
    stt += static_cast<long double>(p.t) * p.t;
    sw += p.omega;
    stw += static_cast<long double>(p.t) * p.omega;
  }
  const long double det = n * stt - st * st;
  const long double c0 = (sw * stt - st * stw) / det;
  const long double c1 = (n * stw - st * sw) / det;
  return {static_cast<double>(-c0), static_cast<double>(c1)};
}

// Random score sets with optional heavy ties.
inline std::vector<double> random_scores(std::mt19937_64& rng, std::size_t n, double shift, bool ties) {
  std::normal_distribution<double> dist(shift, 1.0);
  std::vector<double> v(n);
  for (double& x : v) {
    x = dist(rng);
    if (ties) x = std::round(x * 4.0) / 4.0;
  }
  return v;
}

}  // namespace oracle
