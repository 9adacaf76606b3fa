// Apache License, Version 2.0, refer to LICENSE.txt
#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "lsm/lsm.hpp"

namespace fs = std::filesystem;
using namespace lsm;

namespace {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const std::vector<std::string> kHyperKeys{"a_sigma", "b_sigma", "a_omega", "b_omega", "mu_zeta", "sigma2_zeta",
                                          "a_tau",   "b_tau",   "a_alpha", "b_alpha", "a_kappa", "b_kappa"};

struct Flags {
  std::string config_path, input, model, output_dir, samples_dir, models, Ks;
  int K = 0, n_chains = 0, n_folds = 0, max_rep = 0;
  long n_iter = 0, burn_in = 0, thin = 0;
  std::uint64_t seed = 0;
  bool refit = false;
};

/// Flat run configuration: config file values overridden by given flags.
struct Run {
  std::string command;
  json cfg;

  std::string input() const {
    if (!cfg.contains("input")) throw ConfigError("no input network given");
    return cfg["input"].get<std::string>();
  }
  std::string model() const { return cfg.value("model", std::string("distance")); }
  int K() const { return cfg.value("K", 2); }
  int n_folds() const { return cfg.value("n_folds", 5); }
  McmcConfig mcmc() const {
    auto c = mcmc_config_from_json(cfg);
    c.validate();
    return c;
  }
  fs::path out_dir() const {
    fs::path p = cfg.value("output_dir", std::string("."));
    fs::create_directories(p);
    return p;
  }
};

json hyper_overrides(const json& cfg) {
  json j = json::object();
  for (const auto& k : kHyperKeys)
    if (cfg.contains(k)) j[k] = cfg[k];
  return j;
}

ModelSpec spec_for(const Run& run, const Network& net, const std::string& model, int K) {
  if (K < 1) throw ConfigError("K must be >= 1");
  return model_spec_from_json(model, net.size(), K, hyper_overrides(run.cfg));
}

json flat_config(const Run& run, const ModelSpec* spec) {
  json j = run.cfg;
  j["command"] = run.command;
  j.update(to_json(run.mcmc()));
  if (spec) j.update(to_json(*spec));
  return j;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw FileError("cannot write " + p.string());
  return out;
}

void write_json(const fs::path& p, const json& j) { open_out(p) << j.dump(2) << '\n'; }

Network load_input(const Run& run) { return read_edge_list_file(run.input()); }

std::string display_stat(const std::optional<double>& v) { return v ? format_fixed(*v, 3) : "NA"; }

// ---------------------------------------------------------------------------

void write_actor_labels(const Network& net, const fs::path& dir) {
  auto out = open_out(dir / "actors.csv");
  out << "index,label\n";
  for (int i = 0; i < net.size(); ++i) out << i << ',' << net.labels()[i] << '\n';
}

int cmd_describe(const Run& run) {
  const auto net = load_input(run);
  const auto s = describe(net);
  const auto dir = run.out_dir();
  auto csv = open_out(dir / "stats.csv");
  write_stats_csv(s, csv);
  write_json(dir / "stats.json", stats_to_json(s));
  write_actor_labels(net, dir);
  std::cout << "n_actors," << s.n_actors << '\n'
            << "edge_count," << s.edge_count << '\n'
            << "density," << format_fixed(s.density, 3) << '\n'
            << "transitivity," << display_stat(s.transitivity) << '\n'
            << "assortativity," << display_stat(s.assortativity) << '\n';
  return 0;
}

json rhat_json(const PosteriorSamples& ps, json& warnings, std::ostream& csv) {
  json out = json::object();
  csv << "parameter,rhat\n";
  for (const auto& e : rhat_table(ps)) {
    out[e.parameter] = std::isfinite(e.rhat) ? json(e.rhat) : json(nullptr);
    csv << e.parameter << ',' << (std::isfinite(e.rhat) ? format_double(e.rhat) : "NA") << '\n';
    if (std::isfinite(e.rhat) && e.rhat > 1.1)
      warnings.push_back("R-hat of " + e.parameter + " is " + format_fixed(e.rhat, 3) + " > 1.1");
  }
  return out;
}

void write_model_exports(const PosteriorSamples& ps, const Network& net, const fs::path& dir) {
  if (ps.model == "distance") {
    auto out = open_out(dir / "positions.csv");
    write_positions_csv(summarize_positions(align_samples(ps)), net, out);
  } else if (ps.model == "class") {
    const auto p = co_membership(ps);
    auto cm = open_out(dir / "comembership.csv");
    write_matrix_csv(p, cm);
    const auto labels = partition_point_estimate(p);
    auto part = open_out(dir / "partition.csv");
    write_partition_csv(labels, net, part);
    const auto sizes = cluster_sizes(labels);
    write_json(dir / "cluster_sizes.json", {{"n_clusters", sizes.size()}, {"sizes", sizes}});
  } else {
    auto out = open_out(dir / "lambda.csv");
    write_lambda_csv(summarize_lambda(ps), out);
    auto pos = open_out(dir / "positions.csv");
    write_positions_csv(summarize_positions(ps), net, pos);
  }
}

int cmd_fit(const Run& run) {
  const auto net = load_input(run);
  const auto spec = spec_for(run, net, run.model(), run.K());
  const auto cfg = run.mcmc();
  const auto ps = fit(net, spec, cfg);
  const auto dir = run.out_dir();

  auto samples = open_out(dir / "samples.csv");
  write_samples_csv(ps, samples);
  samples.close();
  json warnings = json::array();
  auto rhat_csv = open_out(dir / "rhat.csv");
  json manifest = flat_config(run, &spec);
  manifest["rhat"] = rhat_json(ps, warnings, rhat_csv);
  manifest["samples_per_chain"] = cfg.stored_per_chain();
  manifest["samples"] = samples_manifest(ps, spec);
  manifest["warnings"] = warnings;
  write_json(dir / "manifest.json", manifest);
  auto prob = open_out(dir / "probabilities.csv");
  write_probability_matrix_csv(ps.dyads, prob);
  write_model_exports(ps, net, dir);
  write_actor_labels(net, dir);

  std::cout << "model," << ps.model << '\n'
            << "K," << ps.K << '\n'
            << "chains," << ps.chains.size() << '\n'
            << "samples_per_chain," << cfg.stored_per_chain() << '\n'
            << "in_sample_auc," << format_fixed(in_sample_auc(ps.dyads, net), 3) << '\n';
  for (const auto& w : warnings) std::cerr << "warning: " << w.get<std::string>() << '\n';
  return 0;
}

int cmd_cv(const Run& run) {
  const auto net = load_input(run);
  const auto spec = spec_for(run, net, run.model(), run.K());
  const auto cfg = run.mcmc();
  if (run.n_folds() < 2) throw ConfigError("n_folds must be >= 2");
  const auto rep = cross_validate(net, spec, cfg, run.n_folds(), cfg.seed);
  EvalReport er;
  er.auc_per_fold = rep.auc_per_fold;
  er.auc_mean = rep.auc_mean;
  const auto dir = run.out_dir();
  json j = flat_config(run, &spec);
  j["n_folds"] = run.n_folds();
  j["report"] = to_json(er);
  write_json(dir / "cv.json", j);
  auto folds = open_out(dir / "folds.csv");
  folds << "i,j,fold\n";
  for (std::size_t d = 0; d < rep.dyads.size(); ++d)
    folds << net.labels()[rep.dyads[d].i] << ',' << net.labels()[rep.dyads[d].j] << ',' << rep.fold_of[d] << '\n';
  for (std::size_t f = 0; f < rep.auc_per_fold.size(); ++f)
    std::cout << "fold_" << f << "_auc," << format_fixed(rep.auc_per_fold[f], 3) << '\n';
  std::cout << "mean_auc," << format_fixed(rep.auc_mean, 3) << '\n';
  return 0;
}

struct GofResult {
  EvalReport report;
  double in_sample_auc;
  json warnings = json::array();
};

GofResult evaluate(const PosteriorSamples& ps, const Network& net, std::uint64_t seed, int max_rep) {
  GofResult g;
  g.report.waic = waic(ps.dyads);
  g.report.dic = dic(ps.dyads);
  g.in_sample_auc = in_sample_auc(ps.dyads, net);
  if (ps.has_states() && ps.total_samples() >= 200)
    g.report.ppc = posterior_predictive(ps, net, default_ppc_stats(), seed, max_rep);
  else
    g.warnings.push_back("posterior predictive checks need at least 200 stored samples");
  return g;
}

int cmd_gof(const Run& run) {
  const auto net = load_input(run);
  const bool refit = run.cfg.value("refit", false);
  const std::string samples_dir = run.cfg.value("samples_dir", std::string());
  PosteriorSamples ps;
  json j;
  if (!samples_dir.empty()) {
    std::ifstream mf(fs::path(samples_dir) / "manifest.json");
    std::ifstream sf(fs::path(samples_dir) / "samples.csv");
    if (!mf || !sf) throw FileError("no manifest.json/samples.csv in " + samples_dir);
    const json m = json::parse(mf);
    const auto cfg = mcmc_config_from_json(m);
    ps = read_samples_csv(sf, m.at("model").get<std::string>(), net.size(), m.at("K").get<int>(), cfg);
    if (ps.n_actors != m.value("samples", json::object()).value("n_actors", net.size()))
      throw ConfigError("samples do not match the input network");
    rebuild_dyad_summary(ps, net);
    j = m;
    j.erase("rhat");
    j.erase("samples");
    j.erase("warnings");
    j["command"] = "gof";
    j["samples_dir"] = samples_dir;
  } else if (refit) {
    const auto spec = spec_for(run, net, run.model(), run.K());
    ps = fit(net, spec, run.mcmc());
    j = flat_config(run, &spec);
  } else {
    throw ConfigError("gof needs --samples DIR or --refit");
  }
  const auto g = evaluate(ps, net, ps.config.seed, run.cfg.value("max_rep", 2000));
  const auto dir = run.out_dir();
  j["report"] = to_json(g.report);
  j["report"]["in_sample_auc"] = g.in_sample_auc;
  j["warnings"] = g.warnings;
  write_json(dir / "gof.json", j);
  auto ppc = open_out(dir / "ppc.csv");
  write_ppc_csv(g.report.ppc, ppc);
  std::cout << "waic," << format_fixed(g.report.waic.waic, 1) << '\n'
            << "p_waic," << format_fixed(g.report.waic.p_waic, 1) << '\n'
            << "dic," << format_fixed(g.report.dic.dic, 1) << '\n'
            << "p_dic," << format_fixed(g.report.dic.p_dic, 1) << '\n'
            << "in_sample_auc," << format_fixed(g.in_sample_auc, 3) << '\n';
  for (const auto& r : g.report.ppc)
    std::cout << "ppc_" << r.stat << ',' << display_stat(r.observed) << ",[" << format_fixed(r.q025, 3) << ','
              << format_fixed(r.q975, 3) << "]\n";
  for (const auto& w : g.warnings) std::cerr << "warning: " << w.get<std::string>() << '\n';
  return 0;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<std::string> list_value(const json& cfg, const char* key, const std::string& fallback) {
  if (!cfg.contains(key)) return split_list(fallback);
  const auto& v = cfg[key];
  if (v.is_string()) return split_list(v.get<std::string>());
  std::vector<std::string> out;
  for (const auto& x : v) out.push_back(x.is_string() ? x.get<std::string>() : x.dump());
  return out;
}

int cmd_compare(const Run& run) {
  const auto net = load_input(run);
  const auto models = list_value(run.cfg, "models", run.model());
  std::vector<int> Ks;
  for (const auto& k : list_value(run.cfg, "Ks", std::to_string(run.K()))) {
    try {
      Ks.push_back(std::stoi(k));
    } catch (const std::exception&) {
      throw ConfigError("bad K value '" + k + "'");
    }
  }
  if (models.empty() || Ks.empty()) throw ConfigError("compare needs at least one model and one K");
  std::sort(Ks.begin(), Ks.end());
  Ks.erase(std::unique(Ks.begin(), Ks.end()), Ks.end());
  for (const auto& m : models) default_model_spec(m, net.size(), 1);
  for (int K : Ks)
    if (K < 1) throw ConfigError("K must be >= 1");

  const auto cfg = run.mcmc();
  struct Row {
    std::string model;
    int K;
    double waic, dic;
    bool best = false;
  };
  std::vector<Row> rows;
  for (const auto& m : models) {
    std::size_t best = rows.size();
    for (int K : Ks) {
      McmcConfig c = cfg;
      c.store_states = false;
      const auto ps = fit(net, spec_for(run, net, m, K), c);
      rows.push_back({m, K, waic(ps.dyads).waic, dic(ps.dyads).dic});
      if (rows.back().waic < rows[best].waic) best = rows.size() - 1;
    }
    rows[best].best = true;
  }
  std::size_t winner = rows.size();
  for (std::size_t r = 0; r < rows.size(); ++r)
    if (rows[r].best && (winner == rows.size() || rows[r].waic < rows[winner].waic)) winner = r;

  const auto dir = run.out_dir();
  auto csv = open_out(dir / "compare.csv");
  csv << "model,K,waic,dic,best_K,winner\n";
  json table = json::array();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& x = rows[r];
    csv << x.model << ',' << x.K << ',' << format_double(x.waic) << ',' << format_double(x.dic) << ','
        << (x.best ? 1 : 0) << ',' << (r == winner ? 1 : 0) << '\n';
    table.push_back({{"model", x.model}, {"K", x.K}, {"waic", x.waic}, {"dic", x.dic}, {"best_K", x.best},
                     {"winner", r == winner}});
  }
  json j = flat_config(run, nullptr);
  j["table"] = table;
  write_json(dir / "compare.json", j);
  std::cout << "model,K,waic,dic\n";
  for (std::size_t r = 0; r < rows.size(); ++r)
    if (rows[r].best)
      std::cout << rows[r].model << ',' << rows[r].K << ',' << format_fixed(rows[r].waic, 1) << ','
                << format_fixed(rows[r].dic, 1) << (r == winner ? ",*" : "") << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

json read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  return j;
}

void add_common(CLI::App* sub, Flags& f, bool model_opts) {
  sub->add_option("input", f.input, "Edge-list file");
  sub->add_option("-c,--config", f.config_path, "Flat JSON config; flags override it");
  sub->add_option("-o,--output-dir", f.output_dir, "Output directory (default $LSM_OUTPUT_DIR or .)");
  if (!model_opts) return;
  sub->add_option("-m,--model", f.model, "distance, class or eigen");
  sub->add_option("-K,--K", f.K, "Latent dimension or number of classes");
  sub->add_option("--n-iter", f.n_iter, "Total iterations per chain");
  sub->add_option("--burn-in", f.burn_in, "Burn-in iterations");
  sub->add_option("--thin", f.thin, "Thinning interval");
  sub->add_option("--chains", f.n_chains, "Number of chains");
  sub->add_option("--seed", f.seed, "Master seed");
}

Run build_run(const std::string& command, CLI::App* sub, const Flags& f) {
  Run run;
  run.command = command;
  run.cfg = f.config_path.empty() ? json::object() : read_config_file(f.config_path);
  if (const char* env = std::getenv("LSM_OUTPUT_DIR"); env && !run.cfg.contains("output_dir"))
    run.cfg["output_dir"] = env;
  auto given = [&](const char* name) { return sub->get_option_no_throw(name) && sub->count(name) > 0; };
  if (given("input")) run.cfg["input"] = f.input;
  if (given("--output-dir")) run.cfg["output_dir"] = f.output_dir;
  if (given("--model")) run.cfg["model"] = f.model;
  if (given("--K")) run.cfg["K"] = f.K;
  if (given("--n-iter")) run.cfg["n_iter"] = f.n_iter;
  if (given("--burn-in")) run.cfg["burn_in"] = f.burn_in;
  if (given("--thin")) run.cfg["thin"] = f.thin;
  if (given("--chains")) run.cfg["n_chains"] = f.n_chains;
  if (given("--seed")) run.cfg["seed"] = f.seed;
  if (given("--folds")) run.cfg["n_folds"] = f.n_folds;
  if (given("--samples")) run.cfg["samples_dir"] = f.samples_dir;
  if (given("--refit")) run.cfg["refit"] = true;
  if (given("--max-rep")) run.cfg["max_rep"] = f.max_rep;
  if (given("--models")) run.cfg["models"] = f.models;
  if (given("--Ks")) run.cfg["Ks"] = f.Ks;
  return run;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian latent space models for undirected networks"};
  app.require_subcommand(1);
  Flags f;
  auto* describe_cmd = app.add_subcommand("describe", "Descriptive network statistics");
  add_common(describe_cmd, f, false);
  auto* fit_cmd = app.add_subcommand("fit", "Run MCMC and export posterior summaries");
  add_common(fit_cmd, f, true);
  auto* cv_cmd = app.add_subcommand("cv", "Cross-validated link prediction AUC");
  add_common(cv_cmd, f, true);
  cv_cmd->add_option("--folds", f.n_folds, "Number of folds (default 5)");
  auto* gof_cmd = app.add_subcommand("gof", "WAIC, DIC and posterior predictive checks");
  add_common(gof_cmd, f, true);
  gof_cmd->add_option("--samples", f.samples_dir, "Directory of a previous fit");
  gof_cmd->add_flag("--refit", f.refit, "Fit the model when no samples are given");
  gof_cmd->add_option("--max-rep", f.max_rep, "Maximum number of replicated networks");
  auto* compare_cmd = app.add_subcommand("compare", "WAIC comparison over models and K");
  add_common(compare_cmd, f, true);
  compare_cmd->add_option("--models", f.models, "Comma-separated model list");
  compare_cmd->add_option("--Ks", f.Ks, "Comma-separated K list");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const std::vector<std::pair<CLI::App*, int (*)(const Run&)>> commands{
      {describe_cmd, cmd_describe}, {fit_cmd, cmd_fit}, {cv_cmd, cmd_cv}, {gof_cmd, cmd_gof}, {compare_cmd, cmd_compare}};
  try {
    for (const auto& [sub, run_fn] : commands)
      if (sub->parsed()) return run_fn(build_run(sub->get_name(), sub, f));
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const FileError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "error: bad config value: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
