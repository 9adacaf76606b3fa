// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lsm/math.hpp"
#include "lsm/network.hpp"

namespace lsm {

struct McmcConfig {
  long n_iter = 60000;
  long burn_in = 10000;
  long thin = 1;
  int n_chains = 1;
  std::uint64_t seed = 1;
  bool adapt_during_burnin = true;
  bool store_states = true;
  bool store_loglik = false;

  void validate() const {
    if (n_iter <= 0) throw std::invalid_argument("n_iter must be positive");
    if (burn_in < 0 || burn_in >= n_iter) throw std::invalid_argument("burn_in must lie in [0, n_iter)");
    if (thin <= 0) throw std::invalid_argument("thin must be positive");
    if (n_chains <= 0) throw std::invalid_argument("n_chains must be positive");
  }

  long stored_per_chain() const { return (n_iter - burn_in) / thin; }
  bool is_retained(long iter) const { return iter > burn_in && (iter - burn_in) % thin == 0; }
};

/// Per-dyad running summaries over retained samples: posterior mean
/// interaction probability for every dyad, and for observed dyads the
/// log-mean-exp and mean of the pointwise log-likelihood.
class DyadAccumulator {
 public:
  DyadAccumulator() = default;
  explicit DyadAccumulator(const Network& net) : n_(net.size()) {
    const std::size_t d = static_cast<std::size_t>(n_) * (n_ - 1) / 2;
    sum_prob_.assign(d, 0.0);
    sum_logit_.assign(d, 0.0);
    y_.assign(d, 0);
    observed_.assign(d, 0);
    for (int i = 0; i < n_; ++i) {
      for (int j = i + 1; j < n_; ++j) {
        const auto idx = dyad_index(n_, i, j);
        y_[idx] = net.edge(i, j);
        observed_[idx] = net.observed(i, j);
        if (observed_[idx]) observed_idx_.push_back(idx);
      }
    }
    lse_.assign(observed_idx_.size(), {});
    sum_ll_.assign(observed_idx_.size(), 0.0);
  }

  /// `logits` holds the linear predictor of every dyad in dyad_index order.
  /// Returns the log-likelihood summed over observed dyads; if `ll_row` is
  /// non-empty it receives the pointwise log-likelihoods.
  double add(std::span<const double> logits, std::span<double> ll_row = {}) {
    for (std::size_t d = 0; d < logits.size(); ++d) sum_prob_[d] += expit(logits[d]), sum_logit_[d] += logits[d];
    double total = 0.0;
    for (std::size_t o = 0; o < observed_idx_.size(); ++o) {
      const auto d = observed_idx_[o];
      const double ll = bernoulli_logit_loglik(y_[d], logits[d]);
      lse_[o].add(ll);
      sum_ll_[o] += ll;
      total += ll;
      if (!ll_row.empty()) ll_row[o] = ll;
    }
    ++count_;
    return total;
  }

  void merge(const DyadAccumulator& other) {
    if (other.count_ == 0) return;
    if (count_ == 0) {
      *this = other;
      return;
    }
    for (std::size_t d = 0; d < sum_prob_.size(); ++d)
      sum_prob_[d] += other.sum_prob_[d], sum_logit_[d] += other.sum_logit_[d];
    for (std::size_t o = 0; o < lse_.size(); ++o) {
      lse_[o].add(other.lse_[o].value());
      sum_ll_[o] += other.sum_ll_[o];
    }
    count_ += other.count_;
  }

  long count() const { return count_; }
  int n_actors() const { return n_; }
  const std::vector<std::size_t>& observed_indices() const { return observed_idx_; }
  int y(std::size_t dyad) const { return y_[dyad]; }
  bool observed(std::size_t dyad) const { return observed_[dyad] != 0; }

  /// Posterior mean interaction probability, every dyad.
  std::vector<double> mean_prob() const {
    std::vector<double> out(sum_prob_.size());
    for (std::size_t d = 0; d < out.size(); ++d) out[d] = sum_prob_[d] / static_cast<double>(count_);
    return out;
  }

  /// Posterior mean linear predictor, every dyad.
  std::vector<double> mean_logit() const {
    std::vector<double> out(sum_logit_.size());
    for (std::size_t d = 0; d < out.size(); ++d) out[d] = sum_logit_[d] / static_cast<double>(count_);
    return out;
  }

  /// log E[p(y_d | params)] per observed dyad.
  std::vector<double> lppd() const {
    std::vector<double> out(lse_.size());
    const double lb = std::log(static_cast<double>(count_));
    for (std::size_t o = 0; o < out.size(); ++o) out[o] = lse_[o].value() - lb;
    return out;
  }

  /// E[log p(y_d | params)] per observed dyad.
  std::vector<double> mean_loglik() const {
    std::vector<double> out(sum_ll_.size());
    for (std::size_t o = 0; o < out.size(); ++o) out[o] = sum_ll_[o] / static_cast<double>(count_);
    return out;
  }

 private:
  int n_ = 0;
  long count_ = 0;
  std::vector<double> sum_prob_;
  std::vector<double> sum_logit_;
  std::vector<std::uint8_t> y_;
  std::vector<std::uint8_t> observed_;
  std::vector<std::size_t> observed_idx_;
  std::vector<StreamingLogSumExp> lse_;
  std::vector<double> sum_ll_;
};

struct ChainDraws {
  std::uint64_t seed = 0;
  long n_samples = 0;
  /// Row-major n_samples x columns (empty unless states are stored).
  std::vector<double> values;
  /// One trace per scalar parameter, then the joint log density.
  std::vector<std::vector<double>> traces;
  std::vector<std::pair<std::string, double>> acceptance;
};

/// Retained draws of every chain of one fit.
struct PosteriorSamples {
  std::string model;
  int n_actors = 0;
  int K = 0;
  McmcConfig config;
  std::vector<std::string> columns;
  std::vector<std::string> scalar_names;  // trace names; last one is "log_joint"
  std::vector<ChainDraws> chains;
  DyadAccumulator dyads;
  /// Pointwise log-likelihood rows (retained samples x observed dyads).
  std::vector<std::vector<double>> loglik;

  long total_samples() const {
    long n = 0;
    for (const auto& c : chains) n += c.n_samples;
    return n;
  }

  bool has_states() const { return !chains.empty() && !chains.front().values.empty(); }

  std::span<const double> row(std::size_t chain, long s) const {
    const auto& c = chains.at(chain);
    return {c.values.data() + static_cast<std::size_t>(s) * columns.size(), columns.size()};
  }
  std::span<double> row(std::size_t chain, long s) {
    auto& c = chains.at(chain);
    return {c.values.data() + static_cast<std::size_t>(s) * columns.size(), columns.size()};
  }

  std::size_t column(const std::string& name) const {
    for (std::size_t c = 0; c < columns.size(); ++c)
      if (columns[c] == name) return c;
    throw std::out_of_range("no column " + name);
  }

  /// Trace of one scalar for every chain.
  std::vector<std::vector<double>> trace(const std::string& name) const {
    std::size_t k = 0;
    while (k < scalar_names.size() && scalar_names[k] != name) ++k;
    if (k == scalar_names.size()) throw std::out_of_range("no trace " + name);
    std::vector<std::vector<double>> out;
    for (const auto& c : chains) out.push_back(c.traces.at(k));
    return out;
  }
};

}  // namespace lsm
