// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <stdexcept>
#include <vector>

#include "lsm/math.hpp"
#include "lsm/samples.hpp"

namespace lsm {

struct ProcrustesResult {
  Eigen::MatrixXd Q;        // K x K orthogonal
  Eigen::MatrixXd aligned;  // U_b * Q
  double residual = 0.0;    // || U_0 - U_b Q ||_F^2
  bool unique = true;       // false when the cross-product is rank deficient
};

/// Orthogonal Q minimising tr[(U0 - Ub Q)^T (U0 - Ub Q)]. With
/// Ub^T U0 = W D V^T the minimiser is Q = W V^T.
inline ProcrustesResult procrustes_align(const Eigen::MatrixXd& Ub, const Eigen::MatrixXd& U0) {
  if (Ub.rows() != U0.rows() || Ub.cols() != U0.cols())
    throw std::invalid_argument("procrustes_align: shapes differ");
  const Eigen::MatrixXd cross = Ub.transpose() * U0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  ProcrustesResult r;
  r.Q = svd.matrixU() * svd.matrixV().transpose();
  r.aligned = Ub * r.Q;
  r.residual = (U0 - r.aligned).squaredNorm();
  const auto& sv = svd.singularValues();
  r.unique = sv.size() == 0 || sv(sv.size() - 1) > 1e-10 * std::max(1.0, sv(0));
  return r;
}

inline Eigen::MatrixXd center_columns(const Eigen::MatrixXd& U) {
  return U.rowwise() - U.colwise().mean();
}

struct AlignOptions {
  bool center = true;
};

namespace detail {

inline std::vector<std::size_t> position_offsets(const PosteriorSamples& ps) {
  std::vector<std::size_t> off;
  for (int i = 0; i < ps.n_actors; ++i)
    for (int k = 0; k < ps.K; ++k) off.push_back(ps.column("u_" + std::to_string(i) + "_" + std::to_string(k)));
  return off;
}

inline Eigen::MatrixXd read_positions(std::span<const double> row, const std::vector<std::size_t>& off, int n, int K) {
  Eigen::MatrixXd U(n, K);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < K; ++k) U(i, k) = row[off[static_cast<std::size_t>(i) * K + k]];
  return U;
}

}  // namespace detail

/// Rotates/reflects every stored position matrix onto the first retained
/// sample of the first chain.
inline PosteriorSamples align_samples(PosteriorSamples ps, AlignOptions opt = {}) {
  if (ps.total_samples() == 0 || !ps.has_states()) throw std::invalid_argument("align_samples: no stored samples");
  const auto off = detail::position_offsets(ps);
  const int n = ps.n_actors, K = ps.K;
  Eigen::MatrixXd ref = detail::read_positions(ps.row(0, 0), off, n, K);
  if (opt.center) ref = center_columns(ref);
  for (std::size_t c = 0; c < ps.chains.size(); ++c) {
    for (long s = 0; s < ps.chains[c].n_samples; ++s) {
      auto row = ps.row(c, s);
      Eigen::MatrixXd U = detail::read_positions(row, off, n, K);
      if (opt.center) U = center_columns(U);
      const Eigen::MatrixXd A = procrustes_align(U, ref).aligned;
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < K; ++k) row[off[static_cast<std::size_t>(i) * K + k]] = A(i, k);
    }
  }
  return ps;
}

struct PositionSummary {
  int actor;
  int dim;
  double mean;
  double q025;
  double q975;
};

/// Posterior mean and 95% interval of every latent coordinate.
inline std::vector<PositionSummary> summarize_positions(const PosteriorSamples& ps) {
  const auto off = detail::position_offsets(ps);
  std::vector<PositionSummary> out;
  for (int i = 0; i < ps.n_actors; ++i) {
    for (int k = 0; k < ps.K; ++k) {
      std::vector<double> v;
      const auto col = off[static_cast<std::size_t>(i) * ps.K + k];
      for (std::size_t c = 0; c < ps.chains.size(); ++c)
        for (long s = 0; s < ps.chains[c].n_samples; ++s) v.push_back(ps.row(c, s)[col]);
      out.push_back({i, k, mean(v), quantile(v, 0.025), quantile(v, 0.975)});
    }
  }
  return out;
}

}  // namespace lsm
