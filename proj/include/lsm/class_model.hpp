// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lsm/chains.hpp"
#include "lsm/densities.hpp"
#include "lsm/metropolis.hpp"
#include "lsm/network.hpp"

namespace lsm {

// Latent class (stochastic block) model:
//   y_ij ~ Ber(expit(eta_{phi(xi_i, xi_j)})),  P(xi_i = k) = omega_k,
//   eta_kl ~ N(zeta, tau2),  omega ~ Dir(alpha/K, ..., alpha/K),
//   zeta ~ N(mu_zeta, sigma2_zeta),  tau2 ~ IGam(a_tau, b_tau),  alpha ~ Gam(a_alpha, b_alpha).
// Labels are 0-based in code and 1-based in exported partitions.

/// Ordered pair (min, max) of two class labels in [0, K).
inline std::pair<int, int> phi(int a, int b, int K) {
  if (a < 0 || b < 0 || a >= K || b >= K) throw std::out_of_range("class label out of range");
  return a <= b ? std::pair{a, b} : std::pair{b, a};
}

/// Symmetric K x K block parameters stored as the upper triangle.
class BlockMatrix {
 public:
  BlockMatrix() = default;
  explicit BlockMatrix(int K, double value = 0.0)
      : K_(K), v_(static_cast<std::size_t>(K) * (K + 1) / 2, value) {}

  int K() const { return K_; }
  std::size_t size() const { return v_.size(); }

  double& operator()(int a, int b) { return v_[index(a, b)]; }
  double operator()(int a, int b) const { return v_[index(a, b)]; }

  /// Packed position of block phi(a, b).
  std::size_t index(int a, int b) const {
    auto [k, l] = phi(a, b, K_);
    return static_cast<std::size_t>(k) * (2 * K_ - k + 1) / 2 + (l - k);
  }

  std::span<double> values() { return v_; }
  std::span<const double> values() const { return v_; }

 private:
  int K_ = 0;
  std::vector<double> v_;
};

struct ClassState {
  std::vector<int> xi;
  BlockMatrix eta;
  std::vector<double> log_omega;
  double zeta = 0.0;
  double tau2 = 1.0;
  double alpha = 1.0;

  std::vector<double> omega() const {
    std::vector<double> w(log_omega.size());
    for (std::size_t k = 0; k < w.size(); ++k) w[k] = std::exp(log_omega[k]);
    return w;
  }
};

struct ClassHyper {
  int K = 8;
  double mu_zeta = 0.0;
  double sigma2_zeta = 3.0;
  double a_tau = 2.0;
  double b_tau = 3.0;
  double a_alpha = 1.0;
  double b_alpha = 1.0;

  void validate() const {
    if (K < 1) throw std::invalid_argument("number of classes K must be >= 1");
    if (!(sigma2_zeta > 0 && a_tau > 0 && b_tau > 0 && a_alpha > 0 && b_alpha > 0))
      throw std::invalid_argument("class hyperparameters must be positive");
  }
};

inline double prob_class(const BlockMatrix& eta, int xi_i, int xi_j) { return expit(eta(xi_i, xi_j)); }

/// s_kl (edges) and n_kl (observed dyads) per block.
struct BlockCounts {
  BlockMatrix edges;
  BlockMatrix dyads;
};

inline BlockCounts block_counts(const Network& net, const std::vector<int>& xi, int K) {
  BlockCounts c{BlockMatrix(K), BlockMatrix(K)};
  for (int i = 0; i < net.size(); ++i) {
    for (int j = i + 1; j < net.size(); ++j) {
      if (!net.observed(i, j)) continue;
      c.dyads(xi[i], xi[j]) += 1.0;
      c.edges(xi[i], xi[j]) += net.edge(i, j);
    }
  }
  return c;
}

/// Log full conditional of one block parameter, up to a constant.
inline double eta_log_conditional(double eta, double s, double n, double zeta, double tau2) {
  return s * eta - n * log1pexp(eta) - (eta - zeta) * (eta - zeta) / (2.0 * tau2);
}

/// Normalised log probabilities of xi_i = k given all other labels.
inline std::vector<double> xi_log_probs(const Network& net, const ClassState& st, int i) {
  const int K = st.eta.K();
  std::vector<double> edges(K, 0.0), dyads(K, 0.0);
  for (int j = 0; j < net.size(); ++j) {
    if (j == i || !net.observed(i, j)) continue;
    dyads[st.xi[j]] += 1.0;
    edges[st.xi[j]] += net.edge(i, j);
  }
  std::vector<double> lw(K);
  for (int k = 0; k < K; ++k) {
    double w = st.log_omega[k];
    for (int c = 0; c < K; ++c) {
      if (dyads[c] == 0.0) continue;
      const double e = st.eta(k, c);
      // log expit(e) = -log1pexp(-e); log(1 - expit(e)) = -log1pexp(e)
      w -= edges[c] * log1pexp(-e) + (dyads[c] - edges[c]) * log1pexp(e);
    }
    lw[k] = w;
  }
  const double norm = log_sum_exp(lw);
  for (double& x : lw) x -= norm;
  return lw;
}

inline void gibbs_xi(const Network& net, ClassState& st, Rng& rng) {
  for (int i = 0; i < net.size(); ++i) st.xi[i] = rcategorical_log(rng, xi_log_probs(net, st, i));
}

inline std::vector<double> omega_dirichlet_params(const std::vector<int>& xi, double alpha, int K) {
  std::vector<double> a(K, alpha / K);
  for (int x : xi) a[x] += 1.0;
  return a;
}

/// Draws a new log omega vector.
inline std::vector<double> gibbs_omega(const std::vector<int>& xi, double alpha, int K, Rng& rng) {
  return rlog_dirichlet(rng, omega_dirichlet_params(xi, alpha, K));
}

inline Gaussian zeta_conditional_class(const BlockMatrix& eta, const ClassHyper& h, double tau2) {
  const double n_blocks = static_cast<double>(eta.size());
  const double v2 = 1.0 / (1.0 / h.sigma2_zeta + n_blocks / tau2);
  double sum = 0.0;
  for (double e : eta.values()) sum += e;
  return {v2 * (h.mu_zeta / h.sigma2_zeta + sum / tau2), v2};
}

inline double gibbs_zeta_class(const BlockMatrix& eta, const ClassHyper& h, double tau2, Rng& rng) {
  return zeta_conditional_class(eta, h, tau2).draw(rng);
}

inline InvGamma tau2_conditional(const BlockMatrix& eta, double zeta, const ClassHyper& h) {
  double ss = 0.0;
  for (double e : eta.values()) ss += (e - zeta) * (e - zeta);
  const double K = h.K;
  return {h.a_tau + K * (K + 1.0) / 4.0, h.b_tau + 0.5 * ss};
}

inline double gibbs_tau2(const BlockMatrix& eta, double zeta, const ClassHyper& h, Rng& rng) {
  return tau2_conditional(eta, zeta, h).draw(rng);
}

/// Log full conditional of alpha up to a constant. With `include_likelihood`
/// false only the Gam(a_alpha, b_alpha) prior remains.
inline double alpha_log_conditional(double alpha, double sum_log_omega, int K, const ClassHyper& h,
                                    bool include_likelihood = true) {
  if (!(alpha > 0.0)) return -kInf;
  double lp = (h.a_alpha - 1.0) * std::log(alpha) - h.b_alpha * alpha;
  if (include_likelihood)
    lp += std::lgamma(alpha) - K * std::lgamma(alpha / K) + alpha / K * sum_log_omega;
  return lp;
}

/// Random-walk MH on log(alpha); the Jacobian term log(alpha) is included.
inline double mh_update_alpha(double alpha, const std::vector<double>& log_omega, const ClassHyper& h,
                              AdaptiveScale& scale, Rng& rng, bool adapt, bool include_likelihood = true,
                              bool* accepted = nullptr) {
  double slo = 0.0;
  for (double l : log_omega) slo += l;
  const int K = static_cast<int>(log_omega.size());
  const double cur = std::log(alpha);
  const double prop = cur + scale.step() * rnorm(rng);
  const double delta = alpha_log_conditional(std::exp(prop), slo, K, h, include_likelihood) + prop -
                       alpha_log_conditional(alpha, slo, K, h, include_likelihood) - cur;
  const bool ok = metropolis_accept(delta, rng);
  if (adapt) scale.adapt(ok);
  if (accepted) *accepted = ok;
  return ok ? std::exp(prop) : alpha;
}

/// MH update of every block parameter; blocks without observed dyads are
/// drawn exactly from N(zeta, tau2).
inline void mh_update_eta(const Network& net, ClassState& st, std::vector<AdaptiveScale>& scales, Rng& rng,
                          bool adapt, long* accepted = nullptr, long* proposed = nullptr) {
  const int K = st.eta.K();
  const auto counts = block_counts(net, st.xi, K);
  for (int k = 0; k < K; ++k) {
    for (int l = k; l < K; ++l) {
      const double n = counts.dyads(k, l), s = counts.edges(k, l);
      double& eta = st.eta(k, l);
      if (n == 0.0) {
        eta = rnorm(rng, st.zeta, std::sqrt(st.tau2));
        continue;
      }
      auto& sc = scales[st.eta.index(k, l)];
      const double prop = eta + sc.step() * rnorm(rng);
      const double delta = eta_log_conditional(prop, s, n, st.zeta, st.tau2) -
                           eta_log_conditional(eta, s, n, st.zeta, st.tau2);
      const bool ok = metropolis_accept(delta, rng);
      if (adapt) sc.adapt(ok);
      if (accepted) *accepted += ok;
      if (proposed) *proposed += 1;
      if (ok) eta = prop;
    }
  }
}

/// One chain of the class-model sampler; one sweep applies, in order, the
/// eta, xi, omega, zeta, tau2 and alpha updates.
class ClassSampler {
 public:
  using State = ClassState;
  using Hyper = ClassHyper;

  ClassSampler(const Network& net, Hyper hyper, Rng& rng) : net_(&net), hyper_(hyper) {
    hyper_.validate();
    const int K = hyper_.K;
    const double obs = static_cast<double>(std::max<long>(net.observed_dyad_count(), 1));
    const double dens = std::clamp(static_cast<double>(net.edge_count()) / obs, 0.5 / obs, 1.0 - 0.5 / obs);
    state_.zeta = logit(dens);
    state_.tau2 = InvGamma{hyper_.a_tau, hyper_.b_tau}.mean();
    if (!std::isfinite(state_.tau2)) state_.tau2 = hyper_.b_tau;
    state_.alpha = hyper_.a_alpha / hyper_.b_alpha;
    state_.eta = BlockMatrix(K);
    for (double& e : state_.eta.values()) e = rnorm(rng, state_.zeta, 0.5);
    state_.log_omega.assign(K, -std::log(static_cast<double>(K)));
    state_.xi.resize(net.size());
    for (int& x : state_.xi) x = static_cast<int>(runif(rng) * K);
    init_scales();
  }

  ClassSampler(const Network& net, Hyper hyper, State init) : net_(&net), hyper_(hyper), state_(std::move(init)) {
    hyper_.validate();
    if (static_cast<int>(state_.xi.size()) != net.size() || state_.eta.K() != hyper_.K ||
        static_cast<int>(state_.log_omega.size()) != hyper_.K)
      throw std::invalid_argument("initial class state has the wrong shape");
    init_scales();
  }

  const State& state() const { return state_; }
  const Hyper& hyper() const { return hyper_; }
  int latent_dim() const { return hyper_.K; }

  void set_network(const Network& net) {
    if (net.size() != net_->size()) throw std::invalid_argument("network size changed");
    net_ = &net;
  }

  void sweep(Rng& rng, bool adapt) {
    mh_update_eta(*net_, state_, eta_scale_, rng, adapt, &eta_acc_, &eta_prop_);
    gibbs_xi(*net_, state_, rng);
    state_.log_omega = gibbs_omega(state_.xi, state_.alpha, hyper_.K, rng);
    state_.zeta = gibbs_zeta_class(state_.eta, hyper_, state_.tau2, rng);
    state_.tau2 = gibbs_tau2(state_.eta, state_.zeta, hyper_, rng);
    bool ok = false;
    state_.alpha = mh_update_alpha(state_.alpha, state_.log_omega, hyper_, alpha_scale_, rng, adapt, true, &ok);
    alpha_acc_ += ok;
    ++alpha_prop_;
  }

  void dyad_logits(std::span<double> out) const {
    const int n = net_->size();
    std::size_t d = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) out[d++] = state_.eta(state_.xi[i], state_.xi[j]);
  }

  double log_prior() const {
    const int K = hyper_.K;
    double lp = 0.0;
    const Gaussian eta_prior{state_.zeta, state_.tau2};
    for (double e : state_.eta.values()) lp += eta_prior.log_pdf(e);
    lp += Gaussian{hyper_.mu_zeta, hyper_.sigma2_zeta}.log_pdf(state_.zeta);
    lp += InvGamma{hyper_.a_tau, hyper_.b_tau}.log_pdf(state_.tau2);
    for (int x : state_.xi) lp += state_.log_omega[x];
    lp += std::lgamma(state_.alpha) - K * std::lgamma(state_.alpha / K);
    for (double l : state_.log_omega) lp += (state_.alpha / K - 1.0) * l;
    lp += log_gamma_pdf(state_.alpha, hyper_.a_alpha, hyper_.b_alpha);
    return lp;
  }

  std::vector<std::string> scalar_names() const { return {"zeta", "tau2", "alpha"}; }

  std::vector<std::string> columns() const {
    auto c = scalar_names();
    const int K = hyper_.K;
    for (int k = 0; k < K; ++k)
      for (int l = k; l < K; ++l) c.push_back("eta_" + std::to_string(k) + "_" + std::to_string(l));
    for (int k = 0; k < K; ++k) c.push_back("omega_" + std::to_string(k));
    for (int i = 0; i < net_->size(); ++i) c.push_back("xi_" + std::to_string(i));
    return c;
  }

  void write_scalars(std::span<double> out) const {
    out[0] = state_.zeta;
    out[1] = state_.tau2;
    out[2] = state_.alpha;
  }

  void write_row(std::span<double> out) const {
    write_scalars(out);
    std::size_t c = 3;
    for (double e : state_.eta.values()) out[c++] = e;
    for (double l : state_.log_omega) out[c++] = std::exp(l);
    for (int x : state_.xi) out[c++] = x;
  }

  std::vector<std::pair<std::string, double>> acceptance() const {
    return {{"eta", eta_prop_ ? static_cast<double>(eta_acc_) / eta_prop_ : 0.0},
            {"alpha", alpha_prop_ ? static_cast<double>(alpha_acc_) / alpha_prop_ : 0.0}};
  }

 private:
  void init_scales() {
    eta_scale_.assign(static_cast<std::size_t>(hyper_.K) * (hyper_.K + 1) / 2, AdaptiveScale::for_dimension(1, 0.5));
    alpha_scale_ = AdaptiveScale::for_dimension(1, 0.5);
  }

  const Network* net_;
  Hyper hyper_;
  State state_;
  std::vector<AdaptiveScale> eta_scale_;
  AdaptiveScale alpha_scale_;
  long eta_acc_ = 0, eta_prop_ = 0, alpha_acc_ = 0, alpha_prop_ = 0;
};

inline ClassState class_state_from_row(std::span<const double> row, int n_actors, int K) {
  const std::size_t n_eta = static_cast<std::size_t>(K) * (K + 1) / 2;
  if (row.size() != 3 + n_eta + K + static_cast<std::size_t>(n_actors))
    throw std::invalid_argument("row size mismatch");
  ClassState s;
  s.zeta = row[0];
  s.tau2 = row[1];
  s.alpha = row[2];
  s.eta = BlockMatrix(K);
  std::size_t c = 3;
  for (double& e : s.eta.values()) e = row[c++];
  for (int k = 0; k < K; ++k) s.log_omega.push_back(std::log(row[c++]));
  for (int i = 0; i < n_actors; ++i) s.xi.push_back(static_cast<int>(row[c++]));
  return s;
}

inline std::vector<double> class_logits(const ClassState& s) {
  const int n = static_cast<int>(s.xi.size());
  std::vector<double> out;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) out.push_back(s.eta(s.xi[i], s.xi[j]));
  return out;
}

inline PosteriorSamples fit_class(const Network& net, const ClassHyper& hyper, const McmcConfig& cfg) {
  hyper.validate();
  return run_chains([&](Rng& rng) { return ClassSampler(net, hyper, rng); }, net, cfg, "class");
}

/// Fraction of samples in which each pair of actors shares a class.
inline std::vector<std::vector<double>> co_membership(const std::vector<std::vector<int>>& labels) {
  if (labels.empty()) throw std::invalid_argument("co_membership: no samples");
  const std::size_t n = labels.front().size();
  std::vector<std::vector<double>> p(n, std::vector<double>(n, 0.0));
  for (const auto& xi : labels)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j)
        if (xi[i] == xi[j]) p[i][j] += 1.0;
  const double b = static_cast<double>(labels.size());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) p[j][i] = p[i][j] = p[i][j] / b;
  return p;
}

inline std::vector<std::vector<int>> label_samples(const PosteriorSamples& ps) {
  std::vector<std::size_t> cols;
  for (int i = 0; i < ps.n_actors; ++i) cols.push_back(ps.column("xi_" + std::to_string(i)));
  std::vector<std::vector<int>> out;
  for (std::size_t c = 0; c < ps.chains.size(); ++c) {
    for (long s = 0; s < ps.chains[c].n_samples; ++s) {
      const auto row = ps.row(c, s);
      std::vector<int> xi;
      for (auto col : cols) xi.push_back(static_cast<int>(row[col]));
      out.push_back(std::move(xi));
    }
  }
  return out;
}

inline std::vector<std::vector<double>> co_membership(const PosteriorSamples& ps) {
  return co_membership(label_samples(ps));
}

}  // namespace lsm
