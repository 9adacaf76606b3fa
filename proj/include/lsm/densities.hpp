// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <cmath>

#include "lsm/math.hpp"
#include "lsm/rng.hpp"

namespace lsm {

/// Inverse-gamma IGam(shape, rate); the parameters of a Gibbs full conditional.
struct InvGamma {
  double shape = 1.0;
  double rate = 1.0;

  double mean() const { return shape > 1.0 ? rate / (shape - 1.0) : kInf; }
  double draw(Rng& rng) const { return rinv_gamma(rng, shape, rate); }
  double log_pdf(double x) const {
    return shape * std::log(rate) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - rate / x;
  }
  friend bool operator==(const InvGamma&, const InvGamma&) = default;
};

struct Gaussian {
  double mean = 0.0;
  double var = 1.0;

  double draw(Rng& rng) const { return rnorm(rng, mean, std::sqrt(var)); }
  double log_pdf(double x) const {
    return -0.5 * std::log(2.0 * kPi * var) - 0.5 * (x - mean) * (x - mean) / var;
  }
};

inline double log_gamma_pdf(double x, double shape, double rate) {
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

}  // namespace lsm
