// Apache License, Version 2.0, refer to LICENSE.txt
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "lsm/lsm.hpp"

using namespace lsm;

namespace {

double auc_pairs(const std::vector<double>& s, const std::vector<int>& y) {
  double num = 0, den = 0;
  for (std::size_t a = 0; a < s.size(); ++a)
    for (std::size_t b = 0; b < s.size(); ++b)
      if (y[a] == 1 && y[b] == 0) {
        num += s[a] > s[b] ? 1.0 : s[a] == s[b] ? 0.5 : 0.0;
        den += 1;
      }
  return num / den;
}

WaicResult waic_oracle(const DyadLogLikMatrix& ll) {
  WaicResult r;
  const double B = static_cast<double>(ll.size());
  for (std::size_t d = 0; d < ll.front().size(); ++d) {
    double sp = 0, sl = 0;
    for (const auto& row : ll) sp += std::exp(row[d]), sl += row[d];
    const double lppd = std::log(sp / B);
    r.lppd += lppd;
    r.p_waic += 2 * (lppd - sl / B);
  }
  r.waic = -2 * r.lppd + 2 * r.p_waic;
  return r;
}

DyadLogLikMatrix random_ll(std::size_t B, std::size_t D, Rng& rng) {
  DyadLogLikMatrix m(B, std::vector<double>(D));
  for (auto& row : m)
    for (double& v : row) v = std::log(0.02 + 0.96 * runif(rng));
  return m;
}

}  // namespace

TEST(Waic, SingleSample) {
  const DyadLogLikMatrix ll{{std::log(0.5), std::log(0.25), std::log(0.9)}};
  const auto w = waic(ll);
  EXPECT_NEAR(w.p_waic, 0.0, 1e-15);
  EXPECT_NEAR(w.waic, -2 * (std::log(0.5) + std::log(0.25) + std::log(0.9)), 1e-12);
}

TEST(Waic, TwoSamplesOneDyad) {
  const DyadLogLikMatrix ll{{std::log(0.5)}, {std::log(0.25)}};
  const auto w = waic(ll);
  EXPECT_NEAR(w.lppd, std::log(0.375), 1e-15);
  const double p = 2 * (std::log(0.375) - (std::log(0.5) + std::log(0.25)) / 2);
  EXPECT_NEAR(w.p_waic, p, 1e-15);
  EXPECT_NEAR(w.waic, -2 * std::log(0.375) + 2 * p, 1e-14);
}

TEST(Waic, MatchesOracleAndInvariances) {
  Rng rng(1);
  auto ll = random_ll(40, 25, rng);
  const auto a = waic(ll), o = waic_oracle(ll);
  EXPECT_NEAR(a.waic, o.waic, 1e-10);
  EXPECT_NEAR(a.p_waic, o.p_waic, 1e-10);
  EXPECT_GE(a.p_waic, 0.0);

  auto rows = ll;
  std::reverse(rows.begin(), rows.end());
  EXPECT_NEAR(waic(rows).waic, a.waic, 1e-10);
  auto cols = ll;
  for (auto& r : cols) std::reverse(r.begin(), r.end());
  EXPECT_NEAR(waic(cols).waic, a.waic, 1e-10);

  auto dropped = ll;
  for (auto& r : dropped) r.pop_back();
  DyadLogLikMatrix single;
  for (const auto& r : ll) single.push_back({r.back()});
  EXPECT_NEAR(a.waic - waic(dropped).waic, waic(single).waic, 1e-10);

  EXPECT_THROW(waic(DyadLogLikMatrix{}), std::invalid_argument);
}

TEST(Waic, StreamingMatchesMatrix) {
  Rng rng(2);
  auto net = sample_random_graph(8, 0.4, rng);
  net.mask(1, 5);
  DyadAccumulator acc(net);
  DyadLogLikMatrix ll;
  std::vector<double> row(acc.observed_indices().size());
  for (int b = 0; b < 30; ++b) {
    std::vector<double> logits(28);
    for (double& v : logits) v = rnorm(rng, 0.0, 2.0);
    acc.add(logits, row);
    ll.push_back(row);
  }
  EXPECT_NEAR(waic(acc).waic, waic(ll).waic, 1e-10);
  EXPECT_EQ(ll.front().size(), 27u);
  for (const auto& r : ll)
    for (double v : r) EXPECT_LE(v, 0.0);
}

TEST(Dic, DegeneratePosterior) {
  const std::vector<double> m{std::log(0.3), std::log(0.8)};
  const DyadLogLikMatrix ll{m, m, m};
  const auto d = dic(ll, m);
  EXPECT_NEAR(d.p_dic, 0.0, 1e-14);
  EXPECT_NEAR(d.dic, -2 * (m[0] + m[1]), 1e-14);
}

TEST(Dic, TwoSampleOracle) {
  const DyadLogLikMatrix ll{{std::log(0.5), std::log(0.4)}, {std::log(0.7), std::log(0.2)}};
  const std::vector<double> at_mean{std::log(0.6), std::log(0.3)};
  const double hat = std::log(0.6) + std::log(0.3);
  const double expected = 0.5 * (std::log(0.5) + std::log(0.4) + std::log(0.7) + std::log(0.2));
  const auto d = dic(ll, at_mean);
  EXPECT_NEAR(d.p_dic, 2 * hat - 2 * expected, 1e-12);
  EXPECT_NEAR(d.dic, -2 * hat + 2 * (2 * hat - 2 * expected), 1e-12);
  EXPECT_THROW(dic(ll, std::vector<double>{0.0}), std::invalid_argument);
}

TEST(Dic, StreamingMatchesMatrix) {
  Rng rng(3);
  const auto net = sample_random_graph(7, 0.3, rng);
  DyadAccumulator acc(net);
  DyadLogLikMatrix ll;
  std::vector<double> row(21);
  for (int b = 0; b < 20; ++b) {
    std::vector<double> logits(21);
    for (double& v : logits) v = rnorm(rng);
    acc.add(logits, row);
    ll.push_back(row);
  }
  EXPECT_NEAR(dic(acc).dic, dic(ll, loglik_at_posterior_mean(acc)).dic, 1e-10);
  EXPECT_GE(dic(acc).p_dic, 0.0);
}

TEST(Dic, PlugInIsPosteriorMeanLinearPredictor) {
  Network net(3);
  net.set_edge(0, 1);
  DyadAccumulator acc(net);
  acc.add(std::vector<double>{1.0, -2.0, 0.5});
  acc.add(std::vector<double>{3.0, 0.0, -0.5});
  const auto at = loglik_at_posterior_mean(acc);
  ASSERT_EQ(at.size(), 3u);
  EXPECT_NEAR(at[0], std::log(expit(2.0)), 1e-14);
  EXPECT_NEAR(at[1], std::log(1.0 - expit(-1.0)), 1e-14);
  EXPECT_NEAR(at[2], std::log(0.5), 1e-14);
}

TEST(Dic, DiffersFromWaicOnFit) {
  const auto net = read_edge_list_file(LSM_DATA_DIR "/florentine.txt");
  McmcConfig cfg;
  cfg.n_iter = 3000;
  cfg.burn_in = 1000;
  const auto ps = fit(net, default_model_spec("distance", 15, 2), cfg);
  const auto d = dic(ps.dyads);
  EXPECT_GE(d.p_dic, 0.0);
  EXPECT_GT(std::abs(d.dic - waic(ps.dyads).waic), 1e-6);
}

TEST(Auc, Examples) {
  EXPECT_DOUBLE_EQ(roc_auc({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(roc_auc({0.5, 0.5, 0.5, 0.5}, {0, 1, 0, 1}), 0.5);
  EXPECT_THROW(roc_auc({0.1, 0.2}, {1, 1}), std::invalid_argument);
  EXPECT_THROW(roc_auc({0.1, 0.2}, {0, 0}), std::invalid_argument);
}

TEST(Auc, MatchesPairOracle) {
  Rng rng(4);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> s(20);
    std::vector<int> y(20);
    for (int k = 0; k < 20; ++k) {
      s[k] = std::round(runif(rng) * 8) / 8;
      y[k] = k % 3 == 0 ? 1 : runif(rng) < 0.4;
    }
    EXPECT_NEAR(roc_auc(s, y), auc_pairs(s, y), 1e-12);
  }
}

TEST(Auc, NegationComplement) {
  Rng rng(5);
  std::vector<double> s(30), neg(30);
  std::vector<int> y(30);
  for (int k = 0; k < 30; ++k) s[k] = rnorm(rng), neg[k] = -s[k], y[k] = k % 2;
  EXPECT_NEAR(roc_auc(neg, y), 1.0 - roc_auc(s, y), 1e-12);
}

TEST(Folds, ExactPartitionAndDeterminism) {
  const auto f = assign_folds(561, 5, 42);
  std::vector<int> sizes(5, 0);
  for (int x : f) {
    ASSERT_GE(x, 0);
    ASSERT_LT(x, 5);
    ++sizes[x];
  }
  for (int s : sizes) EXPECT_TRUE(s == 112 || s == 113);
  EXPECT_EQ(f, assign_folds(561, 5, 42));
  EXPECT_NE(f, assign_folds(561, 5, 43));
  EXPECT_THROW(assign_folds(10, 1, 1), std::invalid_argument);
}

TEST(CrossValidate, ErdosRenyiNearChance) {
  Rng rng(6);
  const auto net = sample_random_graph(30, 0.2, rng);
  McmcConfig cfg;
  cfg.n_iter = 1500;
  cfg.burn_in = 500;
  for (const char* m : {"distance", "class", "eigen"}) {
    const auto rep = cross_validate(net, default_model_spec(m, 30, 2), cfg, 5, 7);
    EXPECT_EQ(rep.auc_per_fold.size(), 5u);
    EXPECT_GE(rep.auc_mean, 0.4) << m;
    EXPECT_LE(rep.auc_mean, 0.6) << m;
    std::set<std::pair<int, int>> seen;
    for (const auto& d : rep.dyads) seen.insert({d.i, d.j});
    EXPECT_EQ(seen.size(), 435u);
  }
}

TEST(CrossValidate, Deterministic) {
  const auto net = read_edge_list_file(LSM_DATA_DIR "/florentine.txt");
  McmcConfig cfg;
  cfg.n_iter = 400;
  cfg.burn_in = 100;
  const auto spec = default_model_spec("distance", 15, 2);
  const auto a = cross_validate(net, spec, cfg, 3, 5), b = cross_validate(net, spec, cfg, 3, 5);
  EXPECT_EQ(a.fold_of, b.fold_of);
  EXPECT_EQ(a.auc_per_fold, b.auc_per_fold);
}

TEST(Ppc, ZeroProbabilities) {
  Network net(6);
  net.set_edge(0, 1);
  const std::vector<std::vector<double>> rows(50, std::vector<double>(15, -1e9));
  Rng rng(8);
  const auto rec = ppc_from_logits(rows, net, {"density", "transitivity", "assortativity"}, rng);
  EXPECT_EQ(rec[0].q005, 0.0);
  EXPECT_EQ(rec[0].q995, 0.0);
  EXPECT_GT(*rec[0].observed, rec[0].q995);
  EXPECT_EQ(rec[1].n_dropped, 50);
  EXPECT_EQ(rec[2].n_dropped, 50);
  EXPECT_TRUE(std::isnan(rec[1].mean));
}

TEST(Ppc, IntervalsOrderedOnFit) {
  const auto net = read_edge_list_file(LSM_DATA_DIR "/florentine.txt");
  McmcConfig cfg;
  cfg.n_iter = 1500;
  cfg.burn_in = 500;
  cfg.seed = 9;
  const auto ps = fit(net, default_model_spec("distance", 15, 2), cfg);
  const auto rec = posterior_predictive(ps, net, default_ppc_stats(), 3, 500);
  ASSERT_EQ(rec.size(), 3u);
  for (const auto& r : rec) {
    EXPECT_LE(r.q005, r.q025);
    EXPECT_LE(r.q025, r.q975);
    EXPECT_LE(r.q975, r.q995);
    EXPECT_EQ(r.n_used + r.n_dropped, 500);
  }
  McmcConfig small = cfg;
  small.n_iter = 600;
  const auto few = fit(net, default_model_spec("distance", 15, 2), small);
  EXPECT_THROW(posterior_predictive(few, net, default_ppc_stats(), 3), std::invalid_argument);
}

TEST(Rhat, TableFromChains) {
  const auto net = read_edge_list_file(LSM_DATA_DIR "/florentine.txt");
  McmcConfig cfg;
  cfg.n_iter = 2000;
  cfg.burn_in = 500;
  cfg.n_chains = 2;
  const auto ps = fit(net, default_model_spec("distance", 15, 2), cfg);
  const auto t = rhat_table(ps);
  ASSERT_EQ(t.size(), 4u);
  EXPECT_EQ(t.back().parameter, "log_joint");
  for (const auto& e : t) EXPECT_TRUE(std::isfinite(e.rhat));
}
