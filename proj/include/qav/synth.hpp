#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qav/calib.hpp"
#include "qav/embedding.hpp"

namespace qav {

// A world where each sample's angle to its subject centre grows linearly
// as quality falls:
//   angle = max(0, base_angle + genuine_quality_slope * (q_high - q) + noise_sd * N(0, 1)).
// Imposter scores do not depend on quality; genuine scores drop with it.
struct SynthConfig {
  std::uint64_t seed = 0;
  std::size_t n_subjects = 50;
  std::size_t samples_per_subject = 10;
  std::size_t d = 64;
  double q_low = 10.0;
  double q_high = 110.0;  // q_low == q_high gives a constant-quality world
  double genuine_quality_slope = 0.004;  // radians per quality unit
  double noise_sd = 0.05;                // radians
  double base_angle = 0.3;               // radians, at q_high

  // Throws InvalidArgument.
  void validate() const;

  // Recovers omega_opt(t) ~ 0.12 * t - 0.08 under default calibration.
  static SynthConfig planted(std::uint64_t seed = 1);
  // Constant quality: no weight can improve on raw scores.
  static SynthConfig no_signal(std::uint64_t seed = 1);
};

// Sample ids "s<subject>_<index>", subject ids "p<subject>", zero-padded so
// lexicographic order follows generation order. Bit-identical for a seed
// on every platform.
std::vector<Embedding> generate(const SynthConfig& cfg);

struct OraclePoint {
  double fmr_target = 0.0;
  double threshold = 0.0;
  double omega = 0.0;
  std::size_t misses = 0;
  double fnmr = 0.0;
};

struct OracleSweep {
  std::vector<OraclePoint> best;     // over the whole grid
  std::vector<OraclePoint> strided;  // over grid indices divisible by the stride
};

// Exhaustive sweep over every grid point, every imposter score recomputed
// per weight. Slow; meant as a reference for optimal_weights. With a grid
// refined by k and stride k, `strided` is the optimum over the unrefined
// grid.
OracleSweep brute_force_sweep(const ComparisonSet& set, std::span<const double> fmr_targets,
                              const OmegaGrid& grid, bool use_sigmoid, std::size_t stride);

inline std::vector<OraclePoint> brute_force_weights(const ComparisonSet& set,
                                                    std::span<const double> fmr_targets,
                                                    const OmegaGrid& grid, bool use_sigmoid) {
  return brute_force_sweep(set, fmr_targets, grid, use_sigmoid, 1).best;
}

// Generates cfg's world, forms all pairs and runs brute_force_weights on a
// grid 10 times finer than calib.omega_grid.
std::vector<OraclePoint> planted_oracle(const SynthConfig& cfg,
                                        std::span<const double> fmr_targets,
                                        const CalibConfig& calib = {});

}  // namespace qav
