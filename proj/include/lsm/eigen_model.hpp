// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lsm/chains.hpp"
#include "lsm/densities.hpp"
#include "lsm/distance_model.hpp"
#include "lsm/metropolis.hpp"
#include "lsm/network.hpp"

namespace lsm {

// Eigenmodel:
//   y_ij ~ Ber(expit(zeta + sum_k lambda_k u_ik u_jk)),  u_i ~ N(0, sigma2 I),
//   lambda_k ~ N(0, kappa2),  zeta ~ N(0, omega2),  and inverse-gamma priors
//   on sigma2, kappa2, omega2.

struct EigenState {
  double zeta = 0.0;
  Eigen::MatrixXd U;       // I x K
  Eigen::VectorXd lambda;  // K
  double sigma2 = 1.0;
  double kappa2 = 1.0;
  double omega2 = 1.0;
};

struct EigenHyper {
  int K = 2;
  double a_sigma = 2.0, b_sigma = 3.0;
  double a_kappa = 2.0, b_kappa = 3.0;
  double a_omega = 2.0, b_omega = 3.0;

  void validate() const {
    if (K < 1) throw std::invalid_argument("latent dimension K must be >= 1");
    if (!(a_sigma > 0 && b_sigma > 0 && a_kappa > 0 && b_kappa > 0 && a_omega > 0 && b_omega > 0))
      throw std::invalid_argument("eigen hyperparameters must be positive");
  }
};

inline double prob_eigen(double zeta, std::span<const double> u_i, std::span<const double> u_j,
                         std::span<const double> lambda) {
  if (u_i.size() != lambda.size() || u_j.size() != lambda.size())
    throw std::invalid_argument("prob_eigen: dimension mismatch");
  double q = 0.0;
  for (std::size_t k = 0; k < lambda.size(); ++k) q += lambda[k] * u_i[k] * u_j[k];
  return expit(zeta + q);
}

inline InvGamma gibbs_kappa2(const Eigen::VectorXd& lambda, double a_kappa, double b_kappa) {
  return {a_kappa + 0.5 * static_cast<double>(lambda.size()), b_kappa + 0.5 * lambda.squaredNorm()};
}

/// Starting values from the leading (largest-magnitude) eigenpairs of the
/// centred adjacency matrix: columns scaled to unit variance, lambda_k the
/// matching eigenvalue over I.
inline EigenState spectral_start(const Network& net, int K) {
  const int n = net.size();
  const double obs = static_cast<double>(std::max<long>(net.observed_dyad_count(), 1));
  const double dens = static_cast<double>(net.edge_count()) / obs;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && net.observed(i, j)) A(i, j) = (net.edge(i, j) ? 1.0 : 0.0) - dens;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(es.eigenvalues()(a)) > std::abs(es.eigenvalues()(b));
  });
  EigenState s;
  s.U = Eigen::MatrixXd::Zero(n, K);
  s.lambda = Eigen::VectorXd::Zero(K);
  const double scale = std::sqrt(static_cast<double>(n));
  for (int k = 0; k < K && k < n; ++k) {
    s.U.col(k) = es.eigenvectors().col(order[k]) * scale;
    s.lambda(k) = es.eigenvalues()(order[k]) / n;
  }
  const double clamped = std::clamp(dens, 0.5 / obs, 1.0 - 0.5 / obs);
  s.zeta = logit(clamped);
  return s;
}

/// One chain of the eigenmodel sampler. Sweep order: positions (MH per
/// actor), each lambda_k (MH), zeta (MH), then Gibbs for sigma2, kappa2 and
/// omega2.
class EigenSampler {
 public:
  using State = EigenState;
  using Hyper = EigenHyper;

  EigenSampler(const Network& net, Hyper hyper, Rng& /*rng*/) : net_(&net), hyper_(hyper) {
    hyper_.validate();
    state_ = spectral_start(net, hyper_.K);
    state_.sigma2 = 1.0;
    state_.kappa2 = std::max(state_.lambda.squaredNorm() / hyper_.K, 1e-2);
    state_.omega2 = InvGamma{hyper_.a_omega, hyper_.b_omega}.mean();
    if (!std::isfinite(state_.omega2)) state_.omega2 = hyper_.b_omega;
    init_scales();
    refresh();
  }

  EigenSampler(const Network& net, Hyper hyper, State init) : net_(&net), hyper_(hyper), state_(std::move(init)) {
    hyper_.validate();
    if (state_.U.rows() != net.size() || state_.U.cols() != hyper_.K || state_.lambda.size() != hyper_.K)
      throw std::invalid_argument("initial eigen state has the wrong shape");
    init_scales();
    refresh();
  }

  const State& state() const { return state_; }
  const Hyper& hyper() const { return hyper_; }
  int latent_dim() const { return hyper_.K; }

  void set_network(const Network& net) {
    if (net.size() != net_->size()) throw std::invalid_argument("network size changed");
    net_ = &net;
  }

  void sweep(Rng& rng, bool adapt) {
    update_positions(rng, adapt);
    update_lambda(rng, adapt);
    update_zeta(rng, adapt);
    state_.sigma2 = gibbs_sigma2_distance(state_.U, hyper_.a_sigma, hyper_.b_sigma).draw(rng);
    state_.kappa2 = gibbs_kappa2(state_.lambda, hyper_.a_kappa, hyper_.b_kappa).draw(rng);
    state_.omega2 = gibbs_omega2(state_.zeta, hyper_.a_omega, hyper_.b_omega).draw(rng);
  }

  void update_positions(Rng& rng, bool adapt) {
    const int n = net_->size(), K = hyper_.K;
    std::vector<double> proposal(K), qnew(n);
    for (int i = 0; i < n; ++i) {
      auto& sc = u_scale_[i];
      for (int k = 0; k < K; ++k) proposal[k] = state_.U(i, k) + sc.step() * rnorm(rng);
      double delta = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        double q = 0.0;
        for (int k = 0; k < K; ++k) q += state_.lambda(k) * proposal[k] * state_.U(j, k);
        qnew[j] = q;
        if (!net_->observed(i, j)) continue;
        const int y = net_->edge(i, j);
        delta += bernoulli_logit_loglik(y, state_.zeta + q) - bernoulli_logit_loglik(y, state_.zeta + quad_(i, j));
      }
      double old_sq = 0.0, new_sq = 0.0;
      for (int k = 0; k < K; ++k) {
        old_sq += state_.U(i, k) * state_.U(i, k);
        new_sq += proposal[k] * proposal[k];
      }
      delta -= (new_sq - old_sq) / (2.0 * state_.sigma2);
      const bool ok = metropolis_accept(delta, rng);
      if (adapt) sc.adapt(ok);
      ++u_prop_;
      u_acc_ += ok;
      if (!ok) continue;
      for (int k = 0; k < K; ++k) state_.U(i, k) = proposal[k];
      for (int j = 0; j < n; ++j)
        if (j != i) quad_(i, j) = quad_(j, i) = qnew[j];
    }
  }

  void update_lambda(Rng& rng, bool adapt) {
    const int n = net_->size();
    for (int k = 0; k < hyper_.K; ++k) {
      auto& sc = lambda_scale_[k];
      const double cur = state_.lambda(k);
      const double prop = cur + sc.step() * rnorm(rng);
      const double dl = prop - cur;
      double delta = 0.0;
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          if (!net_->observed(i, j)) continue;
          const int y = net_->edge(i, j);
          const double q = quad_(i, j);
          delta += bernoulli_logit_loglik(y, state_.zeta + q + dl * state_.U(i, k) * state_.U(j, k)) -
                   bernoulli_logit_loglik(y, state_.zeta + q);
        }
      }
      delta -= (prop * prop - cur * cur) / (2.0 * state_.kappa2);
      const bool ok = metropolis_accept(delta, rng);
      if (adapt) sc.adapt(ok);
      ++lambda_prop_;
      lambda_acc_ += ok;
      if (!ok) continue;
      state_.lambda(k) = prop;
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
          quad_(i, j) += dl * state_.U(i, k) * state_.U(j, k);
          quad_(j, i) = quad_(i, j);
        }
    }
  }

  void update_zeta(Rng& rng, bool adapt) {
    const double prop = state_.zeta + zeta_scale_.step() * rnorm(rng);
    double delta = 0.0;
    const int n = net_->size();
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        if (!net_->observed(i, j)) continue;
        const int y = net_->edge(i, j);
        delta += bernoulli_logit_loglik(y, prop + quad_(i, j)) - bernoulli_logit_loglik(y, state_.zeta + quad_(i, j));
      }
    delta -= (prop * prop - state_.zeta * state_.zeta) / (2.0 * state_.omega2);
    const bool ok = metropolis_accept(delta, rng);
    if (adapt) zeta_scale_.adapt(ok);
    ++zeta_prop_;
    zeta_acc_ += ok;
    if (ok) state_.zeta = prop;
  }

  void dyad_logits(std::span<double> out) const {
    const int n = net_->size();
    std::size_t d = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) out[d++] = state_.zeta + quad_(i, j);
  }

  double log_prior() const {
    const double n_pos = static_cast<double>(state_.U.size());
    double lp = -0.5 * n_pos * std::log(2.0 * kPi * state_.sigma2) - 0.5 * state_.U.squaredNorm() / state_.sigma2;
    lp += InvGamma{hyper_.a_sigma, hyper_.b_sigma}.log_pdf(state_.sigma2);
    const double K = hyper_.K;
    lp += -0.5 * K * std::log(2.0 * kPi * state_.kappa2) - 0.5 * state_.lambda.squaredNorm() / state_.kappa2;
    lp += InvGamma{hyper_.a_kappa, hyper_.b_kappa}.log_pdf(state_.kappa2);
    lp += Gaussian{0.0, state_.omega2}.log_pdf(state_.zeta);
    lp += InvGamma{hyper_.a_omega, hyper_.b_omega}.log_pdf(state_.omega2);
    return lp;
  }

  std::vector<std::string> scalar_names() const { return {"zeta", "sigma2", "kappa2", "omega2"}; }

  std::vector<std::string> columns() const {
    auto c = scalar_names();
    for (int k = 0; k < hyper_.K; ++k) c.push_back("lambda_" + std::to_string(k));
    for (auto& s : position_columns(net_->size(), hyper_.K)) c.push_back(std::move(s));
    return c;
  }

  void write_scalars(std::span<double> out) const {
    out[0] = state_.zeta;
    out[1] = state_.sigma2;
    out[2] = state_.kappa2;
    out[3] = state_.omega2;
  }

  void write_row(std::span<double> out) const {
    write_scalars(out);
    std::size_t c = 4;
    for (int k = 0; k < hyper_.K; ++k) out[c++] = state_.lambda(k);
    for (int i = 0; i < state_.U.rows(); ++i)
      for (int k = 0; k < state_.U.cols(); ++k) out[c++] = state_.U(i, k);
  }

  std::vector<std::pair<std::string, double>> acceptance() const {
    auto rate = [](long a, long p) { return p ? static_cast<double>(a) / p : 0.0; };
    return {{"u", rate(u_acc_, u_prop_)}, {"lambda", rate(lambda_acc_, lambda_prop_)}, {"zeta", rate(zeta_acc_, zeta_prop_)}};
  }

 private:
  void init_scales() {
    u_scale_.assign(net_->size(), AdaptiveScale::for_dimension(hyper_.K, 0.5));
    lambda_scale_.assign(hyper_.K, AdaptiveScale::for_dimension(1, 0.2));
    zeta_scale_ = AdaptiveScale::for_dimension(1, 0.3);
  }

  void refresh() {
    const int n = net_->size();
    quad_.setZero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        double q = 0.0;
        for (int k = 0; k < hyper_.K; ++k) q += state_.lambda(k) * state_.U(i, k) * state_.U(j, k);
        quad_(i, j) = quad_(j, i) = q;
      }
  }

  const Network* net_;
  Hyper hyper_;
  State state_;
  Eigen::MatrixXd quad_;
  std::vector<AdaptiveScale> u_scale_;
  std::vector<AdaptiveScale> lambda_scale_;
  AdaptiveScale zeta_scale_;
  long u_acc_ = 0, u_prop_ = 0, lambda_acc_ = 0, lambda_prop_ = 0, zeta_acc_ = 0, zeta_prop_ = 0;
};

inline EigenState eigen_state_from_row(std::span<const double> row, int n_actors, int K) {
  if (row.size() != 4 + static_cast<std::size_t>(K) + static_cast<std::size_t>(n_actors) * K)
    throw std::invalid_argument("row size mismatch");
  EigenState s;
  s.zeta = row[0];
  s.sigma2 = row[1];
  s.kappa2 = row[2];
  s.omega2 = row[3];
  s.lambda.resize(K);
  std::size_t c = 4;
  for (int k = 0; k < K; ++k) s.lambda(k) = row[c++];
  s.U.resize(n_actors, K);
  for (int i = 0; i < n_actors; ++i)
    for (int k = 0; k < K; ++k) s.U(i, k) = row[c++];
  return s;
}

inline std::vector<double> eigen_logits(const EigenState& s) {
  const int n = static_cast<int>(s.U.rows());
  std::vector<double> out;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double q = 0.0;
      for (int k = 0; k < s.lambda.size(); ++k) q += s.lambda(k) * s.U(i, k) * s.U(j, k);
      out.push_back(s.zeta + q);
    }
  return out;
}

inline PosteriorSamples fit_eigen(const Network& net, const EigenHyper& hyper, const McmcConfig& cfg) {
  hyper.validate();
  return run_chains([&](Rng& rng) { return EigenSampler(net, hyper, rng); }, net, cfg, "eigen");
}

struct LambdaSummary {
  int dim;
  double mean;
  double q025;
  double q975;
};

inline std::vector<LambdaSummary> summarize_lambda(const PosteriorSamples& ps) {
  std::vector<LambdaSummary> out;
  for (int k = 0; k < ps.K; ++k) {
    const auto col = ps.column("lambda_" + std::to_string(k));
    std::vector<double> v;
    for (std::size_t c = 0; c < ps.chains.size(); ++c)
      for (long s = 0; s < ps.chains[c].n_samples; ++s) v.push_back(ps.row(c, s)[col]);
    out.push_back({k, mean(v), quantile(v, 0.025), quantile(v, 0.975)});
  }
  return out;
}

}  // namespace lsm
