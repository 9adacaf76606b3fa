// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "lsm/math.hpp"

namespace lsm {

/// Gelman–Rubin potential scale reduction factor for equal-length chains.
inline double gelman_rubin(const std::vector<std::vector<double>>& chains) {
  if (chains.size() < 2) throw std::invalid_argument("gelman_rubin needs at least two chains");
  const std::size_t n = chains.front().size();
  if (n < 2) throw std::invalid_argument("gelman_rubin needs chains of length >= 2");
  for (const auto& c : chains)
    if (c.size() != n) throw std::invalid_argument("gelman_rubin needs equal-length chains");

  const double m = static_cast<double>(chains.size());
  const double nn = static_cast<double>(n);
  std::vector<double> means;
  double w = 0.0;
  for (const auto& c : chains) {
    means.push_back(mean(c));
    w += sample_variance(c);
  }
  w /= m;
  if (!(w > 0.0)) throw std::invalid_argument("gelman_rubin: zero within-chain variance");
  const double b = nn * sample_variance(means);
  const double var_plus = (nn - 1.0) / nn * w + b / nn;
  return std::sqrt(var_plus / w);
}

/// Standard error of the mean of an autocorrelated series by batch means.
inline double batch_means_se(const std::vector<double>& x, std::size_t n_batches = 50) {
  const std::size_t len = x.size() / n_batches;
  if (len == 0) throw std::invalid_argument("series too short for batch means");
  std::vector<double> b(n_batches, 0.0);
  for (std::size_t k = 0; k < n_batches; ++k) {
    for (std::size_t t = 0; t < len; ++t) b[k] += x[k * len + t];
    b[k] /= static_cast<double>(len);
  }
  return std::sqrt(sample_variance(b) / static_cast<double>(n_batches));
}

}  // namespace lsm
