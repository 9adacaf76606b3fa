// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <concepts>
#include <exception>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "lsm/network.hpp"
#include "lsm/rng.hpp"
#include "lsm/samples.hpp"

namespace lsm {

/// A single-chain transition kernel that owns its current state.
template <class S>
concept ChainSampler = requires(S s, const S cs, Rng& rng, std::span<double> out) {
  { s.sweep(rng, true) };
  { cs.dyad_logits(out) };
  { cs.log_prior() } -> std::convertible_to<double>;
  { cs.columns() } -> std::convertible_to<std::vector<std::string>>;
  { cs.write_row(out) };
  { cs.scalar_names() } -> std::convertible_to<std::vector<std::string>>;
  { cs.write_scalars(out) };
  { cs.acceptance() } -> std::convertible_to<std::vector<std::pair<std::string, double>>>;
  { cs.latent_dim() } -> std::convertible_to<int>;
};

class ChainError : public std::runtime_error {
 public:
  ChainError(int chain, long iteration, const std::string& what)
      : std::runtime_error("chain " + std::to_string(chain) + ", iteration " +
                           std::to_string(iteration) + ": " + what),
        chain_(chain),
        iteration_(iteration) {}
  int chain() const { return chain_; }
  long iteration() const { return iteration_; }

 private:
  int chain_;
  long iteration_;
};

namespace detail {

template <class Factory>
ChainDraws run_one_chain(Factory& make_sampler, const Network& net, const McmcConfig& cfg,
                         int chain, DyadAccumulator& acc,
                         std::vector<std::vector<double>>& loglik_rows) {
  ChainDraws out;
  out.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(chain));
  Rng rng(out.seed);
  auto sampler = make_sampler(rng);

  const auto columns = sampler.columns();
  const auto scalars = sampler.scalar_names();
  const std::size_t n_dyads = static_cast<std::size_t>(net.size()) * (net.size() - 1) / 2;
  std::vector<double> logits(n_dyads);
  std::vector<double> scalar_buf(scalars.size());
  std::vector<double> ll_row;
  out.traces.assign(scalars.size() + 1, {});
  const long n_keep = cfg.stored_per_chain();
  for (auto& t : out.traces) t.reserve(n_keep);
  if (cfg.store_states) out.values.reserve(static_cast<std::size_t>(n_keep) * columns.size());

  long iter = 0;
  try {
    for (iter = 1; iter <= cfg.n_iter; ++iter) {
      sampler.sweep(rng, cfg.adapt_during_burnin && iter <= cfg.burn_in);
      if (!cfg.is_retained(iter)) continue;

      sampler.dyad_logits(logits);
      if (cfg.store_loglik) ll_row.assign(acc.observed_indices().size(), 0.0);
      const double ll = acc.add(logits, ll_row);
      if (cfg.store_loglik) loglik_rows.push_back(ll_row);

      sampler.write_scalars(scalar_buf);
      for (std::size_t k = 0; k < scalars.size(); ++k) out.traces[k].push_back(scalar_buf[k]);
      out.traces.back().push_back(ll + sampler.log_prior());

      if (cfg.store_states) {
        const auto at = out.values.size();
        out.values.resize(at + columns.size());
        sampler.write_row(std::span<double>(out.values.data() + at, columns.size()));
      }
      ++out.n_samples;
    }
  } catch (const std::exception& e) {
    throw ChainError(chain, iter, e.what());
  }
  out.acceptance = sampler.acceptance();
  return out;
}

}  // namespace detail

/// Runs cfg.n_chains independent chains, each built by `make_sampler(rng)`
/// from its own sub-seed, and collects the retained draws.
template <class Factory>
PosteriorSamples run_chains(Factory make_sampler, const Network& net, const McmcConfig& cfg,
                            std::string model_name) {
  cfg.validate();
  using Sampler = decltype(make_sampler(std::declval<Rng&>()));
  static_assert(ChainSampler<Sampler>);

  PosteriorSamples ps;
  ps.model = std::move(model_name);
  ps.n_actors = net.size();
  ps.config = cfg;
  {
    Rng probe(derive_seed(cfg.seed, 0));
    auto s = make_sampler(probe);
    ps.columns = s.columns();
    ps.scalar_names = s.scalar_names();
    ps.K = s.latent_dim();
  }
  ps.scalar_names.push_back("log_joint");

  const auto n = static_cast<std::size_t>(cfg.n_chains);
  ps.chains.resize(n);
  std::vector<DyadAccumulator> accs(n, DyadAccumulator(net));
  std::vector<std::vector<std::vector<double>>> ll(n);
  std::vector<std::exception_ptr> errors(n);

  auto work = [&](std::size_t c) {
    try {
      ps.chains[c] = detail::run_one_chain(make_sampler, net, cfg, static_cast<int>(c), accs[c], ll[c]);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  };
  if (n == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    for (std::size_t c = 0; c < n; ++c) threads.emplace_back(work, c);
    for (auto& t : threads) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  ps.dyads = DyadAccumulator(net);
  for (std::size_t c = 0; c < n; ++c) {
    ps.dyads.merge(accs[c]);
    for (auto& row : ll[c]) ps.loglik.push_back(std::move(row));
  }
  return ps;
}

}  // namespace lsm
