// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

namespace lsm {

using Matrix2D = std::vector<std::vector<double>>;

inline void check_comembership(const Matrix2D& p) {
  const std::size_t n = p.size();
  for (const auto& r : p)
    if (r.size() != n) throw std::invalid_argument("co-membership matrix must be square");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(p[i][j] - p[j][i]) > 1e-12) throw std::invalid_argument("co-membership matrix must be symmetric");
}

/// Pairwise misclassification loss of a partition:
///   sum_{i<j} same(i,j)(1-p_ij) c + diff(i,j) p_ij (1-c).
inline double partition_loss(const std::vector<int>& labels, const Matrix2D& p, double rel_cost) {
  double loss = 0.0;
  const std::size_t n = labels.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      loss += labels[i] == labels[j] ? (1.0 - p[i][j]) * rel_cost : p[i][j] * (1.0 - rel_cost);
  return loss;
}

/// Relabels clusters 0..m-1 in order of first appearance.
inline std::vector<int> canonical_labels(const std::vector<int>& labels) {
  std::map<int, int> remap;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int l : labels) {
    auto [it, inserted] = remap.emplace(l, static_cast<int>(remap.size()));
    out.push_back(it->second);
  }
  return out;
}

namespace detail {

/// Average-linkage agglomeration on 1 - p; returns the partition at every
/// number of clusters from n down to 1.
inline std::vector<std::vector<int>> average_linkage_cuts(const Matrix2D& p) {
  const int n = static_cast<int>(p.size());
  std::vector<std::vector<int>> members(n);
  for (int i = 0; i < n; ++i) members[i] = {i};
  std::vector<bool> alive(n, true);
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) d[i][j] = 1.0 - p[i][j];

  auto snapshot = [&] {
    std::vector<int> lab(n);
    for (int c = 0; c < n; ++c)
      if (alive[c])
        for (int i : members[c]) lab[i] = c;
    return canonical_labels(lab);
  };

  std::vector<std::vector<int>> cuts{snapshot()};
  for (int step = 1; step < n; ++step) {
    int ba = -1, bb = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a < n; ++a) {
      if (!alive[a]) continue;
      for (int b = a + 1; b < n; ++b)
        if (alive[b] && d[a][b] < best) best = d[a][b], ba = a, bb = b;
    }
    const double na = static_cast<double>(members[ba].size()), nb = static_cast<double>(members[bb].size());
    for (int c = 0; c < n; ++c) {
      if (!alive[c] || c == ba || c == bb) continue;
      d[ba][c] = d[c][ba] = (na * d[ba][c] + nb * d[bb][c]) / (na + nb);
    }
    members[ba].insert(members[ba].end(), members[bb].begin(), members[bb].end());
    members[bb].clear();
    alive[bb] = false;
    cuts.push_back(snapshot());
  }
  return cuts;
}

/// Single-actor moves (to another cluster or a new singleton) and pairwise
/// cluster merges, applied while they lower the loss.
inline void local_search(std::vector<int>& lab, const Matrix2D& p, double c) {
  const int n = static_cast<int>(lab.size());
  // Loss = const + sum over same-cluster pairs of (c - p_ij).
  bool improved = true;
  while (improved) {
    improved = false;
    int n_clusters = *std::max_element(lab.begin(), lab.end()) + 1;
    for (int i = 0; i < n; ++i) {
      std::vector<double> gain(n_clusters + 1, 0.0);  // sum_{j in k, j != i} (c - p_ij)
      for (int j = 0; j < n; ++j)
        if (j != i) gain[lab[j]] += c - p[i][j];
      int best = lab[i];
      double best_val = gain[lab[i]];
      for (int k = 0; k <= n_clusters; ++k) {
        if (gain[k] < best_val - 1e-12) best_val = gain[k], best = k;
      }
      if (best != lab[i]) {
        lab[i] = best;
        lab = canonical_labels(lab);
        n_clusters = *std::max_element(lab.begin(), lab.end()) + 1;
        improved = true;
      }
    }
    // Merge moves.
    std::vector<std::vector<double>> between(n_clusters, std::vector<double>(n_clusters, 0.0));
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (lab[i] != lab[j]) between[lab[i]][lab[j]] += c - p[i][j], between[lab[j]][lab[i]] += c - p[i][j];
    int ma = -1, mb = -1;
    double best_merge = -1e-12;
    for (int a = 0; a < n_clusters; ++a)
      for (int b = a + 1; b < n_clusters; ++b)
        if (between[a][b] < best_merge) best_merge = between[a][b], ma = a, mb = b;
    if (ma >= 0) {
      for (int& l : lab)
        if (l == mb) l = ma;
      lab = canonical_labels(lab);
      improved = true;
    }
  }
}

}  // namespace detail

/// Point estimate of a partition from co-membership probabilities: every
/// cut of an average-linkage tree on 1 - p seeds a local search, and the
/// lowest-loss result is returned. Labels are 0-based.
inline std::vector<int> partition_point_estimate(const Matrix2D& p, double rel_cost = 0.5) {
  check_comembership(p);
  if (!(rel_cost > 0.0 && rel_cost < 1.0)) throw std::invalid_argument("rel_cost must lie in (0,1)");
  if (p.empty()) return {};
  std::vector<int> best;
  double best_loss = std::numeric_limits<double>::infinity();
  for (auto lab : detail::average_linkage_cuts(p)) {
    detail::local_search(lab, p, rel_cost);
    const double l = partition_loss(lab, p, rel_cost);
    if (l < best_loss - 1e-12) best_loss = l, best = lab;
  }
  return canonical_labels(best);
}

inline std::vector<int> cluster_sizes(const std::vector<int>& labels) {
  std::vector<int> sizes;
  for (int l : labels) {
    if (l >= static_cast<int>(sizes.size())) sizes.resize(l + 1, 0);
    ++sizes[l];
  }
  return sizes;
}

/// Hubert–Arabie adjusted Rand index between two labelings.
inline double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("labelings differ in length");
  const auto ca = canonical_labels(a), cb = canonical_labels(b);
  const int na = ca.empty() ? 0 : *std::max_element(ca.begin(), ca.end()) + 1;
  const int nb = cb.empty() ? 0 : *std::max_element(cb.begin(), cb.end()) + 1;
  std::vector<std::vector<double>> t(na, std::vector<double>(nb, 0.0));
  for (std::size_t i = 0; i < ca.size(); ++i) t[ca[i]][cb[i]] += 1.0;
  auto c2 = [](double x) { return x * (x - 1.0) / 2.0; };
  double sum_ij = 0.0, sum_a = 0.0, sum_b = 0.0;
  std::vector<double> rows(na, 0.0), cols(nb, 0.0);
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < nb; ++j) sum_ij += c2(t[i][j]), rows[i] += t[i][j], cols[j] += t[i][j];
  for (double r : rows) sum_a += c2(r);
  for (double c : cols) sum_b += c2(c);
  const double total = c2(static_cast<double>(ca.size()));
  const double expected = sum_a * sum_b / total;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;
  return (sum_ij - expected) / (max_index - expected);
}

}  // namespace lsm
