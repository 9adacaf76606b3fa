// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "lsm/lsm.hpp"

namespace lsm::testing {

// Joint-distribution check: marginal-conditional draws (theta from the prior)
// against successive-conditional draws (alternate one sampler sweep with a
// fresh y ~ p(y | theta)). Both target p(theta), so every test function must
// agree in mean.

struct GewekeMoment {
  std::string name;
  double mc_mean = 0.0, sc_mean = 0.0;
  double z = 0.0;
};

inline Network simulate_network(std::span<const double> logits, int n, Rng& rng) {
  Network y(n);
  std::size_t d = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (runif(rng) < expit(logits[d++])) y.set_edge(i, j);
  return y;
}

inline DistanceHyper geweke_distance_hyper(int K) { return {K, 6.0, 5.0, 6.0, 5.0}; }

inline ClassHyper geweke_class_hyper(int K) {
  ClassHyper h;
  h.K = K;
  h.mu_zeta = 0.0;
  h.sigma2_zeta = 1.0;
  h.a_tau = 6.0, h.b_tau = 5.0;
  h.a_alpha = 6.0, h.b_alpha = 3.0;
  return h;
}

inline EigenHyper geweke_eigen_hyper(int K) {
  EigenHyper h;
  h.K = K;
  h.a_sigma = 6.0, h.b_sigma = 5.0;
  h.a_kappa = 6.0, h.b_kappa = 5.0;
  h.a_omega = 6.0, h.b_omega = 5.0;
  return h;
}

inline DistanceState prior_draw(const DistanceHyper& h, int n, Rng& rng) {
  DistanceState s;
  s.sigma2 = rinv_gamma(rng, h.a_sigma, h.b_sigma);
  s.omega2 = rinv_gamma(rng, h.a_omega, h.b_omega);
  s.zeta = rnorm(rng, 0.0, std::sqrt(s.omega2));
  s.U.resize(n, h.K);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < h.K; ++k) s.U(i, k) = rnorm(rng, 0.0, std::sqrt(s.sigma2));
  return s;
}

inline ClassState prior_draw(const ClassHyper& h, int n, Rng& rng) {
  ClassState s;
  s.zeta = rnorm(rng, h.mu_zeta, std::sqrt(h.sigma2_zeta));
  s.tau2 = rinv_gamma(rng, h.a_tau, h.b_tau);
  s.eta = BlockMatrix(h.K);
  for (double& e : s.eta.values()) e = rnorm(rng, s.zeta, std::sqrt(s.tau2));
  s.alpha = rgamma(rng, h.a_alpha, h.b_alpha);
  const std::vector<double> conc(h.K, s.alpha / h.K);
  s.log_omega = rlog_dirichlet(rng, conc);
  s.xi.resize(n);
  for (int& x : s.xi) x = rcategorical_log(rng, s.log_omega);
  return s;
}

inline EigenState prior_draw(const EigenHyper& h, int n, Rng& rng) {
  EigenState s;
  s.sigma2 = rinv_gamma(rng, h.a_sigma, h.b_sigma);
  s.kappa2 = rinv_gamma(rng, h.a_kappa, h.b_kappa);
  s.omega2 = rinv_gamma(rng, h.a_omega, h.b_omega);
  s.zeta = rnorm(rng, 0.0, std::sqrt(s.omega2));
  s.U.resize(n, h.K);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < h.K; ++k) s.U(i, k) = rnorm(rng, 0.0, std::sqrt(s.sigma2));
  s.lambda.resize(h.K);
  for (int k = 0; k < h.K; ++k) s.lambda(k) = rnorm(rng, 0.0, std::sqrt(s.kappa2));
  return s;
}

inline std::vector<double> logits_of(const DistanceState& s) { return distance_logits(s); }
inline std::vector<double> logits_of(const ClassState& s) { return class_logits(s); }
inline std::vector<double> logits_of(const EigenState& s) { return eigen_logits(s); }

template <class Sampler>
std::vector<GewekeMoment> geweke_test(const typename Sampler::Hyper& hyper, int n, long n_iter, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 1));
  Network dummy(n);
  const int n_par = static_cast<int>(Sampler(dummy, hyper, prior_draw(hyper, n, rng)).scalar_names().size());
  std::vector<double> scalars(n_par);

  std::vector<std::vector<double>> mc(n_par), sc(n_par);
  for (long t = 0; t < n_iter; ++t) {
    Sampler s(dummy, hyper, prior_draw(hyper, n, rng));
    s.write_scalars(scalars);
    for (int p = 0; p < n_par; ++p) mc[p].push_back(scalars[p]);
  }

  Rng rng2(derive_seed(seed, 2));
  auto init = prior_draw(hyper, n, rng2);
  Network y = simulate_network(logits_of(init), n, rng2);
  Sampler s(y, hyper, init);
  std::vector<double> logits(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (long t = 0; t < n_iter; ++t) {
    s.sweep(rng2, false);
    s.dyad_logits(logits);
    y = simulate_network(logits, n, rng2);
    s.set_network(y);
    s.write_scalars(scalars);
    for (int p = 0; p < n_par; ++p) sc[p].push_back(scalars[p]);
  }

  const auto names = s.scalar_names();
  std::vector<GewekeMoment> out;
  for (int p = 0; p < n_par; ++p) {
    for (int power = 1; power <= 2; ++power) {
      std::vector<double> a = mc[p], b = sc[p];
      if (power == 2) {
        for (double& x : a) x *= x;
        for (double& x : b) x *= x;
      }
      GewekeMoment m;
      m.name = names[p] + (power == 1 ? "" : "^2");
      m.mc_mean = mean(a);
      m.sc_mean = mean(b);
      const double se_mc2 = sample_variance(a) / static_cast<double>(a.size());
      const double se_sc = batch_means_se(b, 50);
      m.z = (m.mc_mean - m.sc_mean) / std::sqrt(se_mc2 + se_sc * se_sc);
      out.push_back(m);
    }
  }
  return out;
}

}  // namespace lsm::testing
