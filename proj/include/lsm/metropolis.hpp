// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "lsm/math.hpp"
#include "lsm/rng.hpp"

namespace lsm {

/// Optimal-scaling acceptance target for a random-walk block of dimension d.
inline double default_target_accept(int dim) {
  if (dim <= 1) return 0.44;
  if (dim == 2) return 0.35;
  return 0.234;
}

/// Robbins–Monro tuned log step size of a Gaussian random-walk proposal.
struct AdaptiveScale {
  double log_step = 0.0;
  double target_accept = 0.44;
  long adapt_count = 0;

  static AdaptiveScale for_dimension(int dim, double initial_step = 1.0) {
    return {std::log(initial_step), default_target_accept(dim), 0};
  }

  double step() const { return std::exp(log_step); }

  void adapt(bool accepted) {
    ++adapt_count;
    log_step += ((accepted ? 1.0 : 0.0) - target_accept) /
                std::pow(static_cast<double>(adapt_count), 0.6);
  }
};

/// Fills `proposal` with current + step * z, z standard spherical Gaussian.
inline void propose_gaussian(std::span<const double> current, double step, Rng& rng,
                             std::span<double> proposal) {
  for (std::size_t k = 0; k < current.size(); ++k) proposal[k] = current[k] + step * rnorm(rng);
}

/// Metropolis acceptance for a log-target difference. -inf rejects, NaN throws.
inline bool metropolis_accept(double log_ratio, Rng& rng) {
  if (std::isnan(log_ratio)) throw std::domain_error("log target evaluated to NaN");
  if (log_ratio >= 0.0) return true;
  if (log_ratio == -kInf) return false;
  return std::log(runif(rng)) < log_ratio;
}

struct MetropolisResult {
  std::vector<double> state;
  bool accepted = false;
  double log_target = 0.0;
};

/// One random-walk Metropolis step against `log_target`. When `adapt` is set
/// the scale is updated with the acceptance indicator.
template <class LogTarget>
MetropolisResult rw_metropolis_step(LogTarget&& log_target, std::span<const double> current,
                                    double current_log_target, AdaptiveScale& scale, Rng& rng,
                                    bool adapt = false) {
  if (!std::isfinite(current_log_target))
    throw std::domain_error("log target must be finite at the current state");
  std::vector<double> proposal(current.size());
  propose_gaussian(current, scale.step(), rng, proposal);
  const double lp = log_target(std::span<const double>(proposal));
  const bool accepted = metropolis_accept(lp - current_log_target, rng);
  if (adapt) scale.adapt(accepted);
  if (accepted) return {std::move(proposal), true, lp};
  return {std::vector<double>(current.begin(), current.end()), false, current_log_target};
}

template <class LogTarget>
MetropolisResult rw_metropolis_step(LogTarget&& log_target, std::span<const double> current,
                                    AdaptiveScale& scale, Rng& rng, bool adapt = false) {
  const double lc = log_target(current);
  return rw_metropolis_step(log_target, current, lc, scale, rng, adapt);
}

}  // namespace lsm
