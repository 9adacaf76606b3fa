// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lsm/diagnostics.hpp"
#include "lsm/math.hpp"
#include "lsm/models.hpp"
#include "lsm/network.hpp"
#include "lsm/rng.hpp"
#include "lsm/samples.hpp"

namespace lsm {

/// Rows are retained samples, columns observed dyads.
using DyadLogLikMatrix = std::vector<std::vector<double>>;

struct WaicResult {
  double waic = 0.0;
  double p_waic = 0.0;
  double lppd = 0.0;
};

struct DicResult {
  double dic = 0.0;
  double p_dic = 0.0;
};

namespace detail {
inline WaicResult waic_from_pointwise(const std::vector<double>& lppd, const std::vector<double>& mean_ll) {
  WaicResult r;
  for (std::size_t d = 0; d < lppd.size(); ++d) {
    r.lppd += lppd[d];
    r.p_waic += 2.0 * (lppd[d] - mean_ll[d]);
  }
  r.waic = -2.0 * r.lppd + 2.0 * r.p_waic;
  return r;
}
}  // namespace detail

inline WaicResult waic(const DyadLogLikMatrix& ll) {
  if (ll.empty() || ll.front().empty()) throw std::invalid_argument("waic: empty log-likelihood matrix");
  const std::size_t B = ll.size(), D = ll.front().size();
  std::vector<double> lppd(D), mean_ll(D, 0.0), col(B);
  for (std::size_t d = 0; d < D; ++d) {
    for (std::size_t b = 0; b < B; ++b) {
      col[b] = ll[b].at(d);
      mean_ll[d] += col[b];
    }
    lppd[d] = log_sum_exp(col) - std::log(static_cast<double>(B));
    mean_ll[d] /= static_cast<double>(B);
  }
  return detail::waic_from_pointwise(lppd, mean_ll);
}

/// Same quantity from the streaming per-dyad summaries of a fit.
inline WaicResult waic(const DyadAccumulator& acc) {
  if (acc.count() == 0 || acc.observed_indices().empty()) throw std::invalid_argument("waic: no samples");
  return detail::waic_from_pointwise(acc.lppd(), acc.mean_loglik());
}

inline DicResult dic(const DyadLogLikMatrix& ll, const std::vector<double>& ll_at_mean) {
  if (ll.empty()) throw std::invalid_argument("dic: empty log-likelihood matrix");
  double expected = 0.0;
  for (const auto& row : ll) {
    if (row.size() != ll_at_mean.size()) throw std::invalid_argument("dic: dyad sets differ");
    for (double v : row) expected += v;
  }
  expected /= static_cast<double>(ll.size());
  const double at_mean = std::accumulate(ll_at_mean.begin(), ll_at_mean.end(), 0.0);
  DicResult r;
  r.p_dic = 2.0 * at_mean - 2.0 * expected;
  r.dic = -2.0 * at_mean + 2.0 * r.p_dic;
  return r;
}

/// Per-dyad log-likelihood at the plug-in estimate: the posterior mean
/// linear predictor of each observed dyad.
inline std::vector<double> loglik_at_posterior_mean(const DyadAccumulator& acc) {
  const auto m = acc.mean_logit();
  std::vector<double> out;
  for (auto d : acc.observed_indices()) out.push_back(bernoulli_logit_loglik(acc.y(d), m[d]));
  return out;
}

inline DicResult dic(const DyadAccumulator& acc) {
  const auto at_mean = loglik_at_posterior_mean(acc);
  double expected = 0.0;
  for (double v : acc.mean_loglik()) expected += v;
  const double hat = std::accumulate(at_mean.begin(), at_mean.end(), 0.0);
  DicResult r;
  r.p_dic = 2.0 * hat - 2.0 * expected;
  r.dic = -2.0 * hat + 2.0 * r.p_dic;
  return r;
}

/// Area under the ROC curve as the Mann–Whitney statistic, ties counted 1/2.
inline double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("roc_auc: size mismatch");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
  double n_pos = 0.0, n_neg = 0.0, rank_sum = 0.0;
  for (std::size_t t = 0; t < order.size();) {
    std::size_t u = t;
    while (u < order.size() && scores[order[u]] == scores[order[t]]) ++u;
    const double avg_rank = 0.5 * static_cast<double>(t + 1 + u);
    for (std::size_t v = t; v < u; ++v) {
      if (labels[order[v]]) {
        n_pos += 1.0;
        rank_sum += avg_rank;
      } else {
        n_neg += 1.0;
      }
    }
    t = u;
  }
  if (n_pos == 0.0 || n_neg == 0.0) throw std::invalid_argument("roc_auc needs both classes");
  return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

/// AUC of posterior mean interaction probabilities against the observed
/// dyads of `net`.
inline double in_sample_auc(const DyadAccumulator& acc, const Network& net) {
  const auto p = acc.mean_prob();
  std::vector<double> s;
  std::vector<int> y;
  for (int i = 0; i < net.size(); ++i)
    for (int j = i + 1; j < net.size(); ++j)
      if (net.observed(i, j)) {
        s.push_back(p[dyad_index(net.size(), i, j)]);
        y.push_back(net.edge(i, j));
      }
  return roc_auc(s, y);
}

struct RhatEntry {
  std::string parameter;
  double rhat;
};

inline std::vector<RhatEntry> rhat_table(const PosteriorSamples& ps) {
  std::vector<RhatEntry> out;
  if (ps.chains.size() < 2) return out;
  for (const auto& name : ps.scalar_names) {
    double r = std::numeric_limits<double>::quiet_NaN();
    try {
      r = gelman_rubin(ps.trace(name));
    } catch (const std::invalid_argument&) {
    }
    out.push_back({name, r});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cross-validation

struct CvReport {
  int n_folds = 0;
  std::vector<Dyad> dyads;      // observed dyads of the input network
  std::vector<int> fold_of;     // fold index per entry of `dyads`
  std::vector<double> auc_per_fold;
  double auc_mean = 0.0;
};

/// Random partition of the observed dyads into n_folds sets of (near) equal size.
inline std::vector<int> assign_folds(std::size_t n_dyads, int n_folds, std::uint64_t seed) {
  if (n_folds < 2) throw std::invalid_argument("n_folds must be >= 2");
  if (n_dyads < static_cast<std::size_t>(n_folds)) throw std::invalid_argument("fewer dyads than folds");
  std::vector<std::size_t> perm(n_dyads);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(derive_seed(seed, 0xf01dULL));
  for (std::size_t t = n_dyads; t > 1; --t) {
    const auto u = static_cast<std::size_t>(runif(rng) * static_cast<double>(t));
    std::swap(perm[t - 1], perm[std::min(u, t - 1)]);
  }
  std::vector<int> fold(n_dyads);
  for (std::size_t t = 0; t < n_dyads; ++t) fold[perm[t]] = static_cast<int>(t % n_folds);
  return fold;
}

/// K-fold cross-validated link prediction: each fold's dyads are masked,
/// the model refitted, and held-out dyads scored by their posterior mean
/// interaction probability.
inline CvReport cross_validate(const Network& net, const ModelSpec& spec, McmcConfig cfg, int n_folds,
                               std::uint64_t seed) {
  CvReport rep;
  rep.n_folds = n_folds;
  rep.dyads = net.observed_dyads();
  rep.fold_of = assign_folds(rep.dyads.size(), n_folds, seed);
  cfg.store_states = false;
  cfg.store_loglik = false;
  for (int f = 0; f < n_folds; ++f) {
    Network train = net;
    std::vector<double> scores;
    std::vector<int> labels;
    std::vector<Dyad> held;
    for (std::size_t d = 0; d < rep.dyads.size(); ++d)
      if (rep.fold_of[d] == f) held.push_back(rep.dyads[d]);
    if (held.empty()) throw std::invalid_argument("fold " + std::to_string(f) + " has no held-out dyads");
    for (const auto& d : held) train.mask(d.i, d.j);
    McmcConfig fold_cfg = cfg;
    fold_cfg.seed = derive_seed(seed, 1000 + static_cast<std::uint64_t>(f));
    const auto ps = fit(train, spec, fold_cfg);
    const auto p = ps.dyads.mean_prob();
    for (const auto& d : held) {
      scores.push_back(p[dyad_index(net.size(), d.i, d.j)]);
      labels.push_back(net.edge(d.i, d.j));
    }
    rep.auc_per_fold.push_back(roc_auc(scores, labels));
  }
  rep.auc_mean = mean(rep.auc_per_fold);
  return rep;
}

// ---------------------------------------------------------------------------
// Posterior predictive checks

struct PpcRecord {
  std::string stat;
  std::optional<double> observed;
  double mean = 0.0;
  double q025 = 0.0, q975 = 0.0, q005 = 0.0, q995 = 0.0;
  long n_used = 0;
  long n_dropped = 0;  // replicates on which the statistic was undefined
};

inline const std::vector<std::string>& default_ppc_stats() {
  static const std::vector<std::string> s{"density", "transitivity", "assortativity"};
  return s;
}

inline std::optional<double> network_statistic(const Network& net, const std::string& stat) {
  if (stat == "density") return density(net);
  if (stat == "transitivity") return transitivity(net);
  if (stat == "assortativity") return degree_assortativity(net);
  throw std::invalid_argument("unknown statistic '" + stat + "'");
}

/// Replicates a network from every dyad probability vector in `logit_rows`
/// and summarises each statistic over the replicates.
inline std::vector<PpcRecord> ppc_from_logits(const std::vector<std::vector<double>>& logit_rows, const Network& net,
                                              const std::vector<std::string>& stats, Rng& rng) {
  const int n = net.size();
  std::vector<std::vector<double>> values(stats.size());
  std::vector<long> dropped(stats.size(), 0);
  for (const auto& logits : logit_rows) {
    Network rep(n);
    std::size_t d = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (runif(rng) < expit(logits[d++])) rep.set_edge(i, j);
    for (std::size_t s = 0; s < stats.size(); ++s) {
      if (auto v = network_statistic(rep, stats[s])) values[s].push_back(*v);
      else ++dropped[s];
    }
  }
  std::vector<PpcRecord> out;
  for (std::size_t s = 0; s < stats.size(); ++s) {
    PpcRecord r;
    r.stat = stats[s];
    r.observed = network_statistic(net, stats[s]);
    r.n_used = static_cast<long>(values[s].size());
    r.n_dropped = dropped[s];
    if (!values[s].empty()) {
      r.mean = mean(values[s]);
      r.q025 = quantile(values[s], 0.025);
      r.q975 = quantile(values[s], 0.975);
      r.q005 = quantile(values[s], 0.005);
      r.q995 = quantile(values[s], 0.995);
    } else {
      r.mean = r.q025 = r.q975 = r.q005 = r.q995 = std::numeric_limits<double>::quiet_NaN();
    }
    out.push_back(r);
  }
  return out;
}

/// Posterior predictive check on at most `max_replicates` evenly spaced
/// retained samples.
inline std::vector<PpcRecord> posterior_predictive(const PosteriorSamples& ps, const Network& net,
                                                   const std::vector<std::string>& stats, std::uint64_t seed,
                                                   long max_replicates = 2000) {
  if (!ps.has_states()) throw std::invalid_argument("posterior_predictive needs stored samples");
  const long total = ps.total_samples();
  if (total < 200) throw std::invalid_argument("posterior_predictive needs at least 200 retained samples");
  const long n_rep = std::min(total, max_replicates);
  std::vector<std::vector<double>> rows;
  rows.reserve(n_rep);
  for (long r = 0; r < n_rep; ++r) {
    long flat = static_cast<long>(static_cast<double>(r) * static_cast<double>(total) / static_cast<double>(n_rep));
    std::size_t c = 0;
    while (flat >= ps.chains[c].n_samples) flat -= ps.chains[c++].n_samples;
    rows.push_back(logits_from_row(ps.model, ps.row(c, flat), ps.n_actors, ps.K));
  }
  Rng rng(derive_seed(seed, 0x99cULL));
  return ppc_from_logits(rows, net, stats, rng);
}

struct EvalReport {
  WaicResult waic;
  DicResult dic;
  std::vector<double> auc_per_fold;
  std::optional<double> auc_mean;
  std::vector<PpcRecord> ppc;
};

}  // namespace lsm
