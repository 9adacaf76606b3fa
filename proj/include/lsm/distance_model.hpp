// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lsm/chains.hpp"
#include "lsm/densities.hpp"
#include "lsm/metropolis.hpp"
#include "lsm/network.hpp"

namespace lsm {

// Latent distance model:
//   y_ij ~ Ber(expit(zeta - ||u_i - u_j||)),  u_i ~ N(0, sigma2 I),
//   zeta ~ N(0, omega2),  sigma2 ~ IGam(a_sigma, b_sigma),  omega2 ~ IGam(a_omega, b_omega).

struct DistanceState {
  double zeta = 0.0;
  Eigen::MatrixXd U;  // I x K, one latent position per row
  double sigma2 = 1.0;
  double omega2 = 1.0;
};

struct DistanceHyper {
  int K = 2;
  double a_sigma = 3.0;
  double b_sigma = 1.0;
  double a_omega = 2.0;
  double b_omega = 100.0;

  void validate() const {
    if (K < 1) throw std::invalid_argument("latent dimension K must be >= 1");
    if (!(a_sigma > 0 && b_sigma > 0 && a_omega > 0 && b_omega > 0))
      throw std::invalid_argument("distance hyperparameters must be positive");
  }
};

inline double prob_distance(double zeta, std::span<const double> u_i, std::span<const double> u_j) {
  if (u_i.size() != u_j.size()) throw std::invalid_argument("position dimensions differ");
  double d2 = 0.0;
  for (std::size_t k = 0; k < u_i.size(); ++k) d2 += (u_i[k] - u_j[k]) * (u_i[k] - u_j[k]);
  return expit(zeta - std::sqrt(d2));
}

/// Inverse-gamma prior on sigma2 with mean pi * I^{2/K} and coefficient of
/// variation 1.
inline InvGamma elicit_sigma2_prior(int n_actors, int K) {
  if (n_actors < 2 || K < 1) throw std::invalid_argument("elicit_sigma2_prior needs I >= 2, K >= 1");
  const double prior_mean = kPi * std::pow(static_cast<double>(n_actors), 2.0 / K);
  return {3.0, 2.0 * prior_mean};
}

/// Defaults used for the Florentine analysis.
inline DistanceHyper default_distance_hyper(int n_actors, int K) {
  const auto s = elicit_sigma2_prior(n_actors, K);
  return {K, s.shape, s.rate, 2.0, 100.0};
}

inline InvGamma gibbs_sigma2_distance(const Eigen::MatrixXd& U, double a_sigma, double b_sigma) {
  return {a_sigma + 0.5 * static_cast<double>(U.rows() * U.cols()), b_sigma + 0.5 * U.squaredNorm()};
}

inline InvGamma gibbs_omega2(double zeta, double a_omega, double b_omega) {
  return {a_omega + 0.5, b_omega + 0.5 * zeta * zeta};
}

inline std::vector<std::string> position_columns(int n_actors, int K) {
  std::vector<std::string> out;
  for (int i = 0; i < n_actors; ++i)
    for (int k = 0; k < K; ++k) out.push_back("u_" + std::to_string(i) + "_" + std::to_string(k));
  return out;
}

/// One chain of the distance-model sampler. Sweep order: positions (MH, one
/// actor at a time), zeta (MH), sigma2 (Gibbs), omega2 (Gibbs).
class DistanceSampler {
 public:
  using State = DistanceState;
  using Hyper = DistanceHyper;

  DistanceSampler(const Network& net, Hyper hyper, Rng& rng) : net_(&net), hyper_(hyper) {
    hyper_.validate();
    const int n = net.size();
    const double obs = static_cast<double>(std::max<long>(net.observed_dyad_count(), 1));
    const double dens = std::clamp(static_cast<double>(net.edge_count()) / obs, 0.5 / obs, 1.0 - 0.5 / obs);
    state_.zeta = logit(dens);
    state_.sigma2 = InvGamma{hyper_.a_sigma, hyper_.b_sigma}.mean();
    if (!std::isfinite(state_.sigma2)) state_.sigma2 = hyper_.b_sigma;
    state_.omega2 = InvGamma{hyper_.a_omega, hyper_.b_omega}.mean();
    if (!std::isfinite(state_.omega2)) state_.omega2 = hyper_.b_omega;
    state_.U.resize(n, hyper_.K);
    const double sd = std::sqrt(state_.sigma2);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < hyper_.K; ++k) state_.U(i, k) = rnorm(rng, 0.0, sd);
    init_scales();
    refresh();
  }

  DistanceSampler(const Network& net, Hyper hyper, State init)
      : net_(&net), hyper_(hyper), state_(std::move(init)) {
    hyper_.validate();
    if (state_.U.rows() != net.size() || state_.U.cols() != hyper_.K)
      throw std::invalid_argument("initial U has the wrong shape");
    init_scales();
    refresh();
  }

  const State& state() const { return state_; }
  const Hyper& hyper() const { return hyper_; }
  int latent_dim() const { return hyper_.K; }

  /// Swaps the data the chain conditions on, keeping the parameter state.
  void set_network(const Network& net) {
    if (net.size() != net_->size()) throw std::invalid_argument("network size changed");
    net_ = &net;
  }

  void sweep(Rng& rng, bool adapt) {
    update_positions(rng, adapt);
    update_zeta(rng, adapt);
    state_.sigma2 = gibbs_sigma2_distance(state_.U, hyper_.a_sigma, hyper_.b_sigma).draw(rng);
    state_.omega2 = gibbs_omega2(state_.zeta, hyper_.a_omega, hyper_.b_omega).draw(rng);
  }

  void update_positions(Rng& rng, bool adapt) {
    const int n = net_->size();
    const int K = hyper_.K;
    std::vector<double> proposal(K), dnew(n);
    for (int i = 0; i < n; ++i) {
      auto& sc = u_scale_[i];
      for (int k = 0; k < K; ++k) proposal[k] = state_.U(i, k) + sc.step() * rnorm(rng);
      double delta = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        double d2 = 0.0;
        for (int k = 0; k < K; ++k) d2 += (proposal[k] - state_.U(j, k)) * (proposal[k] - state_.U(j, k));
        dnew[j] = std::sqrt(d2);
        if (!net_->observed(i, j)) continue;
        const int y = net_->edge(i, j);
        delta += bernoulli_logit_loglik(y, state_.zeta - dnew[j]) -
                 bernoulli_logit_loglik(y, state_.zeta - dist_(i, j));
      }
      double old_sq = 0.0, new_sq = 0.0;
      for (int k = 0; k < K; ++k) {
        old_sq += state_.U(i, k) * state_.U(i, k);
        new_sq += proposal[k] * proposal[k];
      }
      delta -= (new_sq - old_sq) / (2.0 * state_.sigma2);
      const bool ok = metropolis_accept(delta, rng);
      if (adapt) sc.adapt(ok);
      u_tally_.record(ok);
      if (!ok) continue;
      for (int k = 0; k < K; ++k) state_.U(i, k) = proposal[k];
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        dist_(i, j) = dist_(j, i) = dnew[j];
      }
    }
  }

  void update_zeta(Rng& rng, bool adapt) {
    const double prop = state_.zeta + zeta_scale_.step() * rnorm(rng);
    double delta = 0.0;
    const int n = net_->size();
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (!net_->observed(i, j)) continue;
        const int y = net_->edge(i, j);
        delta += bernoulli_logit_loglik(y, prop - dist_(i, j)) -
                 bernoulli_logit_loglik(y, state_.zeta - dist_(i, j));
      }
    }
    delta -= (prop * prop - state_.zeta * state_.zeta) / (2.0 * state_.omega2);
    const bool ok = metropolis_accept(delta, rng);
    if (adapt) zeta_scale_.adapt(ok);
    zeta_tally_.record(ok);
    if (ok) state_.zeta = prop;
  }

  void dyad_logits(std::span<double> out) const {
    const int n = net_->size();
    std::size_t d = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) out[d++] = state_.zeta - dist_(i, j);
  }

  double log_likelihood() const {
    double ll = 0.0;
    const int n = net_->size();
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (net_->observed(i, j)) ll += bernoulli_logit_loglik(net_->edge(i, j), state_.zeta - dist_(i, j));
    return ll;
  }

  double log_prior() const {
    const double n_pos = static_cast<double>(state_.U.size());
    double lp = -0.5 * n_pos * std::log(2.0 * kPi * state_.sigma2) - 0.5 * state_.U.squaredNorm() / state_.sigma2;
    lp += InvGamma{hyper_.a_sigma, hyper_.b_sigma}.log_pdf(state_.sigma2);
    lp += Gaussian{0.0, state_.omega2}.log_pdf(state_.zeta);
    lp += InvGamma{hyper_.a_omega, hyper_.b_omega}.log_pdf(state_.omega2);
    return lp;
  }

  std::vector<std::string> columns() const {
    std::vector<std::string> c = scalar_names();
    for (auto& s : position_columns(net_->size(), hyper_.K)) c.push_back(std::move(s));
    return c;
  }
  std::vector<std::string> scalar_names() const { return {"zeta", "sigma2", "omega2"}; }

  void write_scalars(std::span<double> out) const {
    out[0] = state_.zeta;
    out[1] = state_.sigma2;
    out[2] = state_.omega2;
  }
  void write_row(std::span<double> out) const {
    write_scalars(out);
    std::size_t c = 3;
    for (int i = 0; i < state_.U.rows(); ++i)
      for (int k = 0; k < state_.U.cols(); ++k) out[c++] = state_.U(i, k);
  }

  std::vector<std::pair<std::string, double>> acceptance() const {
    return {{"u", u_tally_.rate()}, {"zeta", zeta_tally_.rate()}};
  }

 private:
  struct Tally {
    long accepted = 0, proposed = 0;
    void record(bool ok) { ++proposed; accepted += ok; }
    double rate() const { return proposed ? static_cast<double>(accepted) / proposed : 0.0; }
  };

  void init_scales() {
    u_scale_.assign(net_->size(), AdaptiveScale::for_dimension(hyper_.K, 1.0));
    zeta_scale_ = AdaptiveScale::for_dimension(1, 0.5);
  }

  void refresh() {
    const int n = net_->size();
    dist_.setZero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) dist_(i, j) = dist_(j, i) = (state_.U.row(i) - state_.U.row(j)).norm();
  }

  const Network* net_;
  Hyper hyper_;
  State state_;
  Eigen::MatrixXd dist_;
  std::vector<AdaptiveScale> u_scale_;
  AdaptiveScale zeta_scale_;
  Tally u_tally_, zeta_tally_;
};

inline DistanceState distance_state_from_row(std::span<const double> row, int n_actors, int K) {
  if (row.size() != 3 + static_cast<std::size_t>(n_actors) * K) throw std::invalid_argument("row size mismatch");
  DistanceState s;
  s.zeta = row[0];
  s.sigma2 = row[1];
  s.omega2 = row[2];
  s.U.resize(n_actors, K);
  std::size_t c = 3;
  for (int i = 0; i < n_actors; ++i)
    for (int k = 0; k < K; ++k) s.U(i, k) = row[c++];
  return s;
}

/// Linear predictor of every dyad (dyad_index order) for a distance state.
inline std::vector<double> distance_logits(const DistanceState& s) {
  const int n = static_cast<int>(s.U.rows());
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) out.push_back(s.zeta - (s.U.row(i) - s.U.row(j)).norm());
  return out;
}

inline PosteriorSamples fit_distance(const Network& net, const DistanceHyper& hyper, const McmcConfig& cfg) {
  hyper.validate();
  return run_chains([&](Rng& rng) { return DistanceSampler(net, hyper, rng); }, net, cfg, "distance");
}

}  // namespace lsm
