#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/types.hpp"

namespace fbdsde {

// All Monte Carlo randomness for one run: forward Brownian increments dW,
// backward Brownian increments dB, and per-mark Poisson counts with their
// compensated versions. Everything is laid out node-major and is immutable
// once sampled; solvers share one bundle so control comparisons use common
// random numbers.
//
// Per-path draw order (fixed, part of the reproducibility contract):
// for each step i: d gaussians for dW, l gaussians for dB, J Poisson counts.
struct NoiseBundle {
  std::uint64_t seed = 0;
  int steps = 0;  // N
  int paths = 0;  // M
  int wdim = 0;   // d
  int bdim = 0;   // l
  double T = 0.0;
  JumpMeasure jumps;

  std::vector<double> dW;      // [(i*M + p)*d + c], i in [0, N)
  std::vector<double> dB;      // [(i*M + p)*l + c]
  std::vector<double> counts;  // [(i*M + p)*J + j], raw Poisson counts
  std::vector<double> dN;      // compensated: counts - w_j*dt
  std::vector<double> btail;   // [(i*M + p)*l + c], B_T - B_{t_i}, i in [0, N]

  double dt() const { return T / steps; }
  const double* dW_at(int i, int p) const { return dW.data() + (static_cast<std::size_t>(i) * paths + p) * wdim; }
  const double* dB_at(int i, int p) const { return dB.data() + (static_cast<std::size_t>(i) * paths + p) * bdim; }
  const double* dN_at(int i, int p) const { return dN.data() + (static_cast<std::size_t>(i) * paths + p) * jumps.count(); }
  const double* counts_at(int i, int p) const { return counts.data() + (static_cast<std::size_t>(i) * paths + p) * jumps.count(); }
  const double* btail_at(int i, int p) const { return btail.data() + (static_cast<std::size_t>(i) * paths + p) * bdim; }
};

NoiseBundle sample_noise_bundle(const TimeGrid& grid, int paths, std::uint64_t seed,
                                int wdim, int bdim, const JumpMeasure& jumps);

// Little-endian binary dump (header + raw increment arrays) for replay.
void write_noise_bundle(const NoiseBundle& bundle, const std::string& path);
NoiseBundle read_noise_bundle(const std::string& path);

}  // namespace fbdsde
