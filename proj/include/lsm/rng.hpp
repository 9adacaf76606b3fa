// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "lsm/math.hpp"

namespace lsm {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent sub-seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

inline double runif(Rng& rng) {
  // (0,1): never returns 0 so log() is safe.
  return (static_cast<double>(rng() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

inline double rnorm(Rng& rng, double mean = 0.0, double sd = 1.0) {
  return std::normal_distribution<double>(mean, sd)(rng);
}

inline double rgamma(Rng& rng, double shape, double rate) {
  return std::gamma_distribution<double>(shape, 1.0 / rate)(rng);
}

/// log of a Gamma(shape, 1) draw; stays finite for tiny shapes.
inline double rlog_gamma(Rng& rng, double shape) {
  if (shape >= 1.0) {
    return std::log(std::gamma_distribution<double>(shape, 1.0)(rng));
  }
  const double g = std::gamma_distribution<double>(shape + 1.0, 1.0)(rng);
  return std::log(g) + std::log(runif(rng)) / shape;
}

/// Inverse-gamma with density proportional to x^{-(shape+1)} exp(-rate/x).
inline double rinv_gamma(Rng& rng, double shape, double rate) {
  return rate / std::gamma_distribution<double>(shape, 1.0)(rng);
}

/// Dirichlet draw returned on the log scale.
inline std::vector<double> rlog_dirichlet(Rng& rng, std::span<const double> concentration) {
  std::vector<double> out(concentration.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = rlog_gamma(rng, concentration[k]);
  const double norm = log_sum_exp(out);
  for (double& x : out) x -= norm;
  return out;
}

/// Index drawn with probability proportional to exp(log_weights).
inline int rcategorical_log(Rng& rng, std::span<const double> log_weights) {
  const double norm = log_sum_exp(log_weights);
  double u = runif(rng);
  int last = 0;
  for (std::size_t k = 0; k < log_weights.size(); ++k) {
    if (log_weights[k] == -kInf) continue;
    last = static_cast<int>(k);
    u -= std::exp(log_weights[k] - norm);
    if (u <= 0.0) return last;
  }
  return last;
}

inline bool rbernoulli(Rng& rng, double p) { return runif(rng) < p; }

}  // namespace lsm
