// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lsm/eval.hpp"
#include "lsm/models.hpp"
#include "lsm/partition.hpp"
#include "lsm/procrustes.hpp"
#include "lsm/network.hpp"
#include "lsm/samples.hpp"

namespace lsm {

using json = nlohmann::json;

/// Shortest text that parses back to the same double.
inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string format_fixed(double x, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
  return buf;
}

inline json optional_to_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// ---------------------------------------------------------------------------
// Statistics

inline void write_stats_csv(const NetStats& s, std::ostream& out) {
  out << "stat,value\n";
  out << "n_actors," << s.n_actors << '\n';
  out << "edge_count," << s.edge_count << '\n';
  out << "density," << format_double(s.density) << '\n';
  out << "transitivity," << (s.transitivity ? format_double(*s.transitivity) : "NA") << '\n';
  out << "assortativity," << (s.assortativity ? format_double(*s.assortativity) : "NA") << '\n';
}

inline json stats_to_json(const NetStats& s) {
  return {{"n_actors", s.n_actors},
          {"edge_count", s.edge_count},
          {"density", s.density},
          {"transitivity", optional_to_json(s.transitivity)},
          {"assortativity", optional_to_json(s.assortativity)},
          {"degree_sequence", s.degree_sequence}};
}

// ---------------------------------------------------------------------------
// Configuration and hyperparameters

inline json to_json(const McmcConfig& c) {
  return {{"n_iter", c.n_iter},         {"burn_in", c.burn_in},
          {"thin", c.thin},             {"n_chains", c.n_chains},
          {"seed", c.seed},             {"adapt_during_burnin", c.adapt_during_burnin},
          {"store_states", c.store_states}, {"store_loglik", c.store_loglik}};
}

inline McmcConfig mcmc_config_from_json(const json& j) {
  McmcConfig c;
  c.n_iter = j.value("n_iter", c.n_iter);
  c.burn_in = j.value("burn_in", c.burn_in);
  c.thin = j.value("thin", c.thin);
  c.n_chains = j.value("n_chains", c.n_chains);
  c.seed = j.value("seed", c.seed);
  c.adapt_during_burnin = j.value("adapt_during_burnin", c.adapt_during_burnin);
  c.store_states = j.value("store_states", c.store_states);
  c.store_loglik = j.value("store_loglik", c.store_loglik);
  return c;
}

inline json to_json(const ModelSpec& spec) {
  return std::visit(
      [&](const auto& h) -> json {
        using H = std::decay_t<decltype(h)>;
        json j{{"model", spec.name()}, {"K", h.K}};
        if constexpr (std::is_same_v<H, DistanceHyper>) {
          j.update({{"a_sigma", h.a_sigma}, {"b_sigma", h.b_sigma}, {"a_omega", h.a_omega}, {"b_omega", h.b_omega}});
        } else if constexpr (std::is_same_v<H, ClassHyper>) {
          j.update({{"mu_zeta", h.mu_zeta}, {"sigma2_zeta", h.sigma2_zeta}, {"a_tau", h.a_tau}, {"b_tau", h.b_tau},
                    {"a_alpha", h.a_alpha}, {"b_alpha", h.b_alpha}});
        } else {
          j.update({{"a_sigma", h.a_sigma}, {"b_sigma", h.b_sigma}, {"a_kappa", h.a_kappa}, {"b_kappa", h.b_kappa},
                    {"a_omega", h.a_omega}, {"b_omega", h.b_omega}});
        }
        return j;
      },
      spec.hyper);
}

/// Defaults for `model` overridden by any hyperparameter keys present in `j`.
inline ModelSpec model_spec_from_json(const std::string& model, int n_actors, int K, const json& j) {
  ModelSpec spec = default_model_spec(model, n_actors, K);
  std::visit(
      [&](auto& h) {
        using H = std::decay_t<decltype(h)>;
        auto set = [&](const char* key, double& field) {
          if (j.contains(key) && !j[key].is_null()) field = j[key].get<double>();
        };
        if constexpr (std::is_same_v<H, DistanceHyper>) {
          set("a_sigma", h.a_sigma), set("b_sigma", h.b_sigma), set("a_omega", h.a_omega), set("b_omega", h.b_omega);
        } else if constexpr (std::is_same_v<H, ClassHyper>) {
          set("mu_zeta", h.mu_zeta), set("sigma2_zeta", h.sigma2_zeta), set("a_tau", h.a_tau), set("b_tau", h.b_tau);
          set("a_alpha", h.a_alpha), set("b_alpha", h.b_alpha);
        } else {
          set("a_sigma", h.a_sigma), set("b_sigma", h.b_sigma), set("a_kappa", h.a_kappa), set("b_kappa", h.b_kappa);
          set("a_omega", h.a_omega), set("b_omega", h.b_omega);
        }
        h.validate();
      },
      spec.hyper);
  return spec;
}

// ---------------------------------------------------------------------------
// Posterior samples: columnar CSV plus JSON manifest

inline long stored_iteration(const McmcConfig& cfg, long s) { return cfg.burn_in + (s + 1) * cfg.thin; }

inline void write_samples_csv(const PosteriorSamples& ps, std::ostream& out) {
  out << "chain,iter";
  for (const auto& c : ps.columns) out << ',' << c;
  out << '\n';
  for (std::size_t c = 0; c < ps.chains.size(); ++c) {
    for (long s = 0; s < ps.chains[c].n_samples; ++s) {
      out << c << ',' << stored_iteration(ps.config, s);
      for (double v : ps.row(c, s)) out << ',' << format_double(v);
      out << '\n';
    }
  }
}

inline json samples_manifest(const PosteriorSamples& ps, const ModelSpec& spec) {
  json chains = json::array();
  for (const auto& c : ps.chains) {
    json acc = json::object();
    for (const auto& [k, v] : c.acceptance) acc[k] = v;
    chains.push_back({{"seed", c.seed}, {"n_samples", c.n_samples}, {"acceptance", acc}});
  }
  return {{"model", ps.model}, {"K", ps.K}, {"n_actors", ps.n_actors}, {"hyper", to_json(spec)},
          {"mcmc", to_json(ps.config)}, {"columns", ps.columns}, {"chains", chains}};
}

/// Reads a sample CSV written by write_samples_csv. Only stored states are
/// restored; rebuild_dyad_summary recomputes the per-dyad summaries.
inline PosteriorSamples read_samples_csv(std::istream& in, const std::string& model, int n_actors, int K,
                                         const McmcConfig& cfg) {
  PosteriorSamples ps;
  ps.model = model;
  ps.n_actors = n_actors;
  ps.K = K;
  ps.config = cfg;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("samples file is empty");
  auto header = detail::split_fields(line);
  if (header.size() < 3 || header[0] != "chain" || header[1] != "iter") throw std::runtime_error("bad samples header");
  ps.columns.assign(header.begin() + 2, header.end());
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = detail::split_fields(line);
    if (f.size() != header.size()) throw ParseError(lineno, "wrong number of fields");
    const auto chain = static_cast<std::size_t>(std::stoul(f[0]));
    if (chain >= ps.chains.size()) ps.chains.resize(chain + 1);
    auto& c = ps.chains[chain];
    for (std::size_t k = 2; k < f.size(); ++k) c.values.push_back(std::stod(f[k]));
    ++c.n_samples;
  }
  for (const auto& name : ps.columns) {
    if (name.rfind("u_", 0) == 0 || name.rfind("eta_", 0) == 0 || name.rfind("omega_", 0) == 0 ||
        name.rfind("xi_", 0) == 0 || name.rfind("lambda_", 0) == 0)
      continue;
    ps.scalar_names.push_back(name);
  }
  for (auto& c : ps.chains) {
    c.traces.assign(ps.scalar_names.size(), {});
    for (long s = 0; s < c.n_samples; ++s)
      for (std::size_t k = 0; k < ps.scalar_names.size(); ++k)
        c.traces[k].push_back(c.values[static_cast<std::size_t>(s) * ps.columns.size() + k]);
  }
  return ps;
}

inline void rebuild_dyad_summary(PosteriorSamples& ps, const Network& net, bool keep_loglik = false) {
  ps.dyads = DyadAccumulator(net);
  ps.loglik.clear();
  std::vector<double> row(ps.dyads.observed_indices().size());
  for (std::size_t c = 0; c < ps.chains.size(); ++c) {
    for (long s = 0; s < ps.chains[c].n_samples; ++s) {
      const auto logits = logits_from_row(ps.model, ps.row(c, s), ps.n_actors, ps.K);
      ps.dyads.add(logits, row);
      if (keep_loglik) ps.loglik.push_back(row);
    }
  }
}

// ---------------------------------------------------------------------------
// Model-specific exports

inline void write_probability_matrix_csv(const DyadAccumulator& acc, std::ostream& out) {
  const int n = acc.n_actors();
  const auto p = acc.mean_prob();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j) out << ',';
      out << (i == j ? "0" : format_double(p[dyad_index(n, i, j)]));
    }
    out << '\n';
  }
}

inline void write_positions_csv(const std::vector<PositionSummary>& pos, const Network& net, std::ostream& out) {
  out << "actor,dim,posterior_mean,q025,q975\n";
  for (const auto& p : pos)
    out << net.labels()[p.actor] << ',' << p.dim << ',' << format_double(p.mean) << ',' << format_double(p.q025)
        << ',' << format_double(p.q975) << '\n';
}

inline void write_matrix_csv(const Matrix2D& m, std::ostream& out) {
  for (const auto& row : m) {
    for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << format_double(row[j]);
    out << '\n';
  }
}

inline void write_partition_csv(const std::vector<int>& labels, const Network& net, std::ostream& out) {
  out << "actor,cluster\n";
  for (std::size_t i = 0; i < labels.size(); ++i) out << net.labels()[i] << ',' << labels[i] + 1 << '\n';
}

inline void write_lambda_csv(const std::vector<LambdaSummary>& lam, std::ostream& out) {
  out << "dim,mean,q025,q975\n";
  for (const auto& l : lam)
    out << l.dim << ',' << format_double(l.mean) << ',' << format_double(l.q025) << ',' << format_double(l.q975)
        << '\n';
}

inline void write_ppc_csv(const std::vector<PpcRecord>& ppc, std::ostream& out) {
  out << "stat,observed,mean,q025,q975,q005,q995\n";
  for (const auto& r : ppc)
    out << r.stat << ',' << (r.observed ? format_double(*r.observed) : "NA") << ',' << format_double(r.mean) << ','
        << format_double(r.q025) << ',' << format_double(r.q975) << ',' << format_double(r.q005) << ','
        << format_double(r.q995) << '\n';
}

inline json to_json(const EvalReport& r) {
  json ppc = json::array();
  for (const auto& p : r.ppc)
    ppc.push_back({{"stat", p.stat}, {"observed", optional_to_json(p.observed)}, {"mean", p.mean},
                   {"q025", p.q025}, {"q975", p.q975}, {"q005", p.q005}, {"q995", p.q995},
                   {"n_used", p.n_used}, {"n_dropped", p.n_dropped}});
  json j{{"waic", r.waic.waic}, {"p_waic", r.waic.p_waic}, {"dic", r.dic.dic}, {"p_dic", r.dic.p_dic},
         {"auc_per_fold", r.auc_per_fold}, {"auc_mean", optional_to_json(r.auc_mean)}, {"ppc", ppc}};
  return j;
}

}  // namespace lsm
