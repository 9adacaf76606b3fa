// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lsm/math.hpp"
#include "lsm/rng.hpp"

namespace lsm {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct Dyad {
  int i;
  int j;
  friend bool operator==(const Dyad&, const Dyad&) = default;
};

/// Undirected binary network over I actors with an optional mask of
/// unobserved dyads. Masked dyads always carry value 0.
class Network {
 public:
  Network() = default;
  explicit Network(int n_actors)
      : n_(n_actors),
        adj_(static_cast<std::size_t>(n_actors) * n_actors, 0),
        obs_(static_cast<std::size_t>(n_actors) * n_actors, 1) {
    if (n_actors < 1) throw std::invalid_argument("network needs at least one actor");
    for (int i = 0; i < n_; ++i) obs_[at(i, i)] = 0;
    labels_.reserve(n_);
    for (int i = 0; i < n_; ++i) labels_.push_back(std::to_string(i));
  }

  int size() const { return n_; }

  bool edge(int i, int j) const { return adj_[at(i, j)] != 0; }
  bool observed(int i, int j) const { return obs_[at(i, j)] != 0; }

  void set_edge(int i, int j, bool value = true) {
    if (i == j) throw std::invalid_argument("self-loops are not allowed");
    const std::uint8_t v = value && observed(i, j) ? 1 : 0;
    adj_[at(i, j)] = v;
    adj_[at(j, i)] = v;
  }

  /// Marks a dyad as unobserved; its value is dropped.
  void mask(int i, int j) {
    if (i == j) return;
    adj_[at(i, j)] = adj_[at(j, i)] = 0;
    obs_[at(i, j)] = obs_[at(j, i)] = 0;
  }

  const std::vector<std::string>& labels() const { return labels_; }
  void set_labels(std::vector<std::string> labels) {
    if (static_cast<int>(labels.size()) != n_) throw std::invalid_argument("label count mismatch");
    labels_ = std::move(labels);
  }

  long edge_count() const {
    long m = 0;
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j) m += edge(i, j);
    return m;
  }

  long observed_dyad_count() const {
    long m = 0;
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j) m += observed(i, j);
    return m;
  }

  bool fully_observed() const {
    return observed_dyad_count() == static_cast<long>(n_) * (n_ - 1) / 2;
  }

  std::vector<int> degrees() const {
    std::vector<int> d(n_, 0);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) d[i] += edge(i, j);
    return d;
  }

  std::vector<Dyad> observed_dyads() const {
    std::vector<Dyad> out;
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j)
        if (observed(i, j)) out.push_back({i, j});
    return out;
  }

  std::vector<Dyad> all_dyads() const {
    std::vector<Dyad> out;
    out.reserve(static_cast<std::size_t>(n_) * (n_ - 1) / 2);
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j) out.push_back({i, j});
    return out;
  }

  std::vector<std::vector<int>> neighbors() const {
    std::vector<std::vector<int>> nb(n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        if (edge(i, j)) nb[i].push_back(j);
    return nb;
  }

  friend bool operator==(const Network& a, const Network& b) {
    return a.n_ == b.n_ && a.adj_ == b.adj_ && a.obs_ == b.obs_;
  }

 private:
  std::size_t at(int i, int j) const { return static_cast<std::size_t>(i) * n_ + j; }

  int n_ = 0;
  std::vector<std::uint8_t> adj_;
  std::vector<std::uint8_t> obs_;
  std::vector<std::string> labels_;
};

/// Index of dyad (i,j), i<j, in row-major upper-triangular order.
inline std::size_t dyad_index(int n, int i, int j) {
  if (i > j) std::swap(i, j);
  return static_cast<std::size_t>(i) * (2 * n - i - 1) / 2 + (j - i - 1);
}

// ---------------------------------------------------------------------------
// Edge-list text format

enum class LabelMode { Auto, Integer, String };

struct EdgeListFormat {
  LabelMode labels = LabelMode::Auto;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_fields(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || c == ' ' || c == '\t' || c == '\r') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

inline std::optional<long> parse_index(const std::string& s) {
  long v = 0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || v < 0) return std::nullopt;
  return v;
}

}  // namespace detail

/// Reads an undirected edge list. One edge per line, two identifiers separated
/// by whitespace or a comma; `#` starts a comment. Two header directives are
/// recognized: `# nodes: N` fixes the actor count (integer labels 0..N-1) and
/// `# labels: a b c` registers string labels in order, so isolated actors can
/// be declared.
inline Network load_edge_list(std::istream& in, EdgeListFormat fmt = {}) {
  struct Row {
    std::size_t line;
    std::string a, b;
  };
  std::vector<Row> rows;
  std::vector<std::string> declared_labels;
  std::optional<long> declared_count;

  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = detail::trim(raw);
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string body = detail::trim(line.substr(1));
      if (body.rfind("nodes:", 0) == 0) {
        auto n = detail::parse_index(detail::trim(body.substr(6)));
        if (!n || *n < 1) throw ParseError(lineno, "invalid node count header");
        declared_count = *n;
      } else if (body.rfind("labels:", 0) == 0) {
        for (auto& t : detail::split_fields(body.substr(7))) declared_labels.push_back(t);
      }
      continue;
    }
    if (auto hash = line.find('#'); hash != std::string::npos) line = detail::trim(line.substr(0, hash));
    auto fields = detail::split_fields(line);
    if (fields.size() != 2) throw ParseError(lineno, "expected two actor identifiers, got '" + line + "'");
    if (fields[0] == fields[1]) throw ParseError(lineno, "self-loop '" + line + "'");
    rows.push_back({lineno, std::move(fields[0]), std::move(fields[1])});
  }

  LabelMode mode = fmt.labels;
  if (mode == LabelMode::Auto) {
    mode = declared_labels.empty() ? LabelMode::Integer : LabelMode::String;
    if (mode == LabelMode::Integer) {
      for (const auto& r : rows) {
        if (!detail::parse_index(r.a) || !detail::parse_index(r.b)) {
          mode = LabelMode::String;
          break;
        }
      }
    }
  }

  if (mode == LabelMode::Integer) {
    long n = declared_count.value_or(0);
    for (const auto& r : rows) {
      auto a = detail::parse_index(r.a);
      auto b = detail::parse_index(r.b);
      if (!a || !b) throw ParseError(r.line, "non-integer actor identifier");
      if (declared_count && (*a >= *declared_count || *b >= *declared_count))
        throw ParseError(r.line, "actor id exceeds declared node count");
      n = std::max({n, *a + 1, *b + 1});
    }
    if (n < 1) throw ParseError(lineno, "no actors found");
    Network net(static_cast<int>(n));
    for (const auto& r : rows) net.set_edge(static_cast<int>(*detail::parse_index(r.a)),
                                            static_cast<int>(*detail::parse_index(r.b)));
    return net;
  }

  std::unordered_map<std::string, int> index;
  std::vector<std::string> labels;
  auto intern = [&](const std::string& s) {
    auto [it, inserted] = index.emplace(s, static_cast<int>(labels.size()));
    if (inserted) labels.push_back(s);
    return it->second;
  };
  for (const auto& l : declared_labels) intern(l);
  std::vector<Dyad> edges;
  for (const auto& r : rows) edges.push_back({intern(r.a), intern(r.b)});
  if (labels.empty()) throw ParseError(lineno, "no actors found");
  Network net(static_cast<int>(labels.size()));
  for (const auto& e : edges) net.set_edge(e.i, e.j);
  net.set_labels(std::move(labels));
  return net;
}

inline Network load_edge_list(const std::string& text, EdgeListFormat fmt = {}) {
  std::istringstream in(text);
  return load_edge_list(in, fmt);
}

class FileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline Network read_edge_list_file(const std::string& path, EdgeListFormat fmt = {}) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open '" + path + "'");
  return load_edge_list(in, fmt);
}

inline bool has_integer_labels(const Network& net) {
  for (int i = 0; i < net.size(); ++i)
    if (net.labels()[i] != std::to_string(i)) return false;
  return true;
}

inline void save_edge_list(const Network& net, std::ostream& out) {
  const bool integer = has_integer_labels(net);
  if (integer) {
    out << "# nodes: " << net.size() << '\n';
  } else {
    out << "# labels:";
    for (const auto& l : net.labels()) out << ' ' << l;
    out << '\n';
  }
  for (int i = 0; i < net.size(); ++i)
    for (int j = i + 1; j < net.size(); ++j)
      if (net.edge(i, j)) out << net.labels()[i] << ' ' << net.labels()[j] << '\n';
}

// ---------------------------------------------------------------------------
// Descriptive statistics

/// Realized edges over observed dyads.
inline double density(const Network& net) {
  if (net.size() < 2) throw std::invalid_argument("density needs at least two actors");
  const long dyads = net.observed_dyad_count();
  if (dyads == 0) throw std::invalid_argument("density undefined: no observed dyads");
  return static_cast<double>(net.edge_count()) / static_cast<double>(dyads);
}

/// Global clustering coefficient 3*triangles / connected triples; nullopt
/// when the network has no connected triple.
inline std::optional<double> transitivity(const Network& net) {
  const auto nb = net.neighbors();
  double triples = 0.0;
  for (const auto& v : nb) {
    const double d = static_cast<double>(v.size());
    triples += d * (d - 1.0) / 2.0;
  }
  if (triples == 0.0) return std::nullopt;
  // Each triangle is seen once per edge (i<j) through a common neighbour k > j.
  double triangles = 0.0;
  for (int i = 0; i < net.size(); ++i) {
    for (int j : nb[i]) {
      if (j <= i) continue;
      for (int k : nb[j])
        if (k > j && net.edge(i, k)) triangles += 1.0;
    }
  }
  return 3.0 * triangles / triples;
}

/// Pearson correlation of the degrees at either end of each edge, each edge
/// entering in both orientations; nullopt when that variance is zero.
inline std::optional<double> degree_assortativity(const Network& net) {
  const auto deg = net.degrees();
  double n = 0.0, sx = 0.0, sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < net.size(); ++i) {
    for (int j = i + 1; j < net.size(); ++j) {
      if (!net.edge(i, j)) continue;
      const double a = deg[i], b = deg[j];
      n += 2.0;
      sx += a + b;
      sxx += a * a + b * b;
      sxy += 2.0 * a * b;
    }
  }
  if (n == 0.0) return std::nullopt;
  const double mx = sx / n;
  const double var = sxx / n - mx * mx;
  if (var <= 1e-12 * std::max(1.0, mx * mx)) return std::nullopt;
  return (sxy / n - mx * mx) / var;
}

struct NetStats {
  int n_actors = 0;
  long edge_count = 0;
  double density = 0.0;
  std::optional<double> transitivity;
  std::optional<double> assortativity;
  std::vector<int> degree_sequence;
};

inline NetStats describe(const Network& net) {
  NetStats s;
  s.n_actors = net.size();
  s.edge_count = net.edge_count();
  s.density = density(net);
  s.transitivity = transitivity(net);
  s.assortativity = degree_assortativity(net);
  s.degree_sequence = net.degrees();
  return s;
}

// ---------------------------------------------------------------------------
// Erdős–Rényi baseline

inline Network sample_random_graph(int n_actors, double theta, Rng& rng) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must lie in [0,1]");
  Network net(n_actors);
  for (int i = 0; i < n_actors; ++i)
    for (int j = i + 1; j < n_actors; ++j)
      if (runif(rng) < theta) net.set_edge(i, j);
  return net;
}

/// Sum over observed dyads of log Bernoulli(y | theta). Returns -infinity when
/// theta sits on a boundary the data contradict.
inline double loglik_random_graph(const Network& net, double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must lie in [0,1]");
  const double edges = static_cast<double>(net.edge_count());
  const double non_edges = static_cast<double>(net.observed_dyad_count()) - edges;
  double ll = 0.0;
  if (edges > 0) ll += theta == 0.0 ? -kInf : edges * std::log(theta);
  if (non_edges > 0) ll += theta == 1.0 ? -kInf : non_edges * std::log1p(-theta);
  return ll;
}

}  // namespace lsm
