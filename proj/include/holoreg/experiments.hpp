#pragma once

#include <functional>
#include <string>
#include <vector>

#include "holoreg/config.hpp"
#include "holoreg/noise.hpp"
#include "holoreg/report.hpp"

namespace holoreg {

/// Least-squares vacuum-Rabi (exchange) frequency of the resonant
/// cavity <-> bright-mode oscillation for N degenerate spins on a grid.
double fit_exchange_frequency(std::size_t n_spins, double coupling_scale,
                              double krylov_tol = 1e-13);

struct SweepPoint {
  double x = 0.0;
  double value = 0.0;
  double stderr_ = 0.0;
};

struct SweepOutcome {
  std::vector<SweepPoint> points;
  ScalingFit fit;
};

/// Named scaling experiments:
///   rabi_vs_n              exchange frequency vs spin count (slope 1/2)
///   gram_offdiag_vs_n      mean |Gram| off-diagonal vs N, random doping (-1/2)
///   echo_register_gain_vs_eps  register-mode excitation gain vs pulse error (2)
SweepOutcome run_named_sweep(const std::string& name, const std::vector<double>& grid,
                             int shots, std::uint64_t seed, int jobs);

/// Deterministic per-shot RNG stream: hash of (seed, point, shot).
std::uint64_t shot_seed(std::uint64_t seed, std::uint64_t point, std::uint64_t shot);

/// Runs `count` bodies on `jobs` workers; results must be written to
/// index-addressed storage to stay deterministic.
void parallel_for(int jobs, int count, const std::function<void(int)>& body);

SimReport cmd_overlap(const ExperimentConfig& config);
SimReport cmd_simulate(const ExperimentConfig& config);
SimReport cmd_sweep(const ExperimentConfig& config);

}  // namespace holoreg
