#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rmdgraph/dataset.hpp"
#include "rmdgraph/parallel.hpp"
#include "rmdgraph/rank.hpp"

namespace rmdgraph {

struct Edge {
  int u = 0;
  int v = 0;
  double weight = 1.0;
};

enum class WeightScheme { unit, rbf };

struct EdgeWeight {
  WeightScheme scheme = WeightScheme::unit;
  double sigma = 0.0;

  static EdgeWeight unit() { return {WeightScheme::unit, 0.0}; }
  static EdgeWeight rbf(double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("rbf needs sigma > 0");
    return {WeightScheme::rbf, sigma};
  }

  std::string to_string() const {
    return scheme == WeightScheme::unit ? "unit" : "rbf";
  }
};

/// Gaussian kernel weight exp(-dist^2 / (2 sigma^2)), in (0, 1].
inline double rbf_weight(double dist, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("rbf_weight needs sigma > 0");
  if (dist < 0.0) throw std::invalid_argument("rbf_weight needs dist >= 0");
  return std::exp(-dist * dist / (2.0 * sigma * sigma));
}

/// Undirected weighted graph as a canonical edge list: u < v, no
/// duplicates, sorted by (u, v), every weight positive.
struct Graph {
  int n = 0;
  std::vector<Edge> edges;
  nlohmann::json meta;  // builder id and parameters

  void validate() const {
    if (n < 1) throw std::invalid_argument("graph needs n >= 1");
    int pu = -1, pv = -1;
    for (const auto& e : edges) {
      if (e.u < 0 || e.v >= n || e.u >= e.v) {
        throw std::invalid_argument("edge endpoints out of order or range");
      }
      if (!(e.weight > 0.0)) {
        throw std::invalid_argument("edge weights must be positive");
      }
      if (e.u < pu || (e.u == pu && e.v <= pv)) {
        throw std::invalid_argument("edge list not sorted unique");
      }
      pu = e.u;
      pv = e.v;
    }
  }

  std::vector<double> weighted_degrees() const {
    std::vector<double> deg(n, 0.0);
    for (const auto& e : edges) {
      deg[e.u] += e.weight;
      deg[e.v] += e.weight;
    }
    return deg;
  }

  /// Adjacency lists (neighbor, weight), neighbors ascending.
  std::vector<std::vector<std::pair<int, double>>> adjacency() const {
    std::vector<std::vector<std::pair<int, double>>> adj(n);
    for (const auto& e : edges) {
      adj[e.u].emplace_back(e.v, e.weight);
      adj[e.v].emplace_back(e.u, e.weight);
    }
    for (auto& lst : adj) std::sort(lst.begin(), lst.end());
    return adj;
  }
};

/// Out-degrees assigned to each node before symmetrization.
struct DegreeProfile {
  std::vector<int> degrees;
  int k = 0;
  double lambda = 1.0;
};

/// Neighbor budget for a node of the given rank: k(lambda + 2(1-lambda)r),
/// rounded half-up and clamped to [1, n-1].
inline int modulated_degree(int k, double lambda, double rank, long n) {
  const double raw = k * (lambda + 2.0 * (1.0 - lambda) * rank);
  const long rounded = static_cast<long>(std::floor(raw + 0.5));
  return static_cast<int>(std::clamp<long>(rounded, 1, n - 1));
}

namespace detail {

/// Exact nearest neighbors per node, ties broken by ascending index.
/// want[i] neighbors are returned for node i, sorted by (distance, index).
inline std::vector<std::vector<int>> nearest_neighbor_lists(
    const Eigen::MatrixXd& pts, const std::vector<int>& want) {
  const long n = pts.rows();
  std::vector<std::vector<int>> lists(n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
    const int w = want[i];
    std::vector<std::pair<double, int>> cand;
    cand.reserve(n - 1);
    for (long j = 0; j < n; ++j) {
      if (static_cast<long>(i) == j) continue;
      cand.emplace_back((pts.row(j) - pts.row(i)).squaredNorm(),
                        static_cast<int>(j));
    }
    std::nth_element(cand.begin(), cand.begin() + (w - 1), cand.end());
    std::sort(cand.begin(), cand.begin() + w);
    lists[i].reserve(w);
    for (int t = 0; t < w; ++t) lists[i].push_back(cand[t].second);
  });
  return lists;
}

/// Union-symmetrizes directed neighbor lists into a canonical edge list.
inline std::vector<Edge> symmetrize(const Eigen::MatrixXd& pts,
                                    const std::vector<std::vector<int>>& lists,
                                    const EdgeWeight& weight) {
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t i = 0; i < lists.size(); ++i) {
    for (int j : lists[i]) {
      pairs.emplace_back(std::min<int>(i, j), std::max<int>(i, j));
    }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  for (const auto& [u, v] : pairs) {
    double w = 1.0;
    if (weight.scheme == WeightScheme::rbf) {
      w = rbf_weight((pts.row(u) - pts.row(v)).norm(), weight.sigma);
    }
    edges.push_back({u, v, w});
  }
  return edges;
}

}  // namespace detail

/// Mutual-or k-NN graph: u and v are linked if either is among the other's
/// k exact nearest neighbors.
inline Graph build_knn_graph(const Dataset& data, int k,
                             const EdgeWeight& weight = EdgeWeight::unit()) {
  const long n = data.n();
  if (k < 1 || k > n - 1) {
    throw std::invalid_argument("k must be in [1, n-1]");
  }
  std::vector<int> want(n, k);
  const auto lists = detail::nearest_neighbor_lists(data.points, want);
  Graph g;
  g.n = static_cast<int>(n);
  g.edges = detail::symmetrize(data.points, lists, weight);
  g.meta = {{"builder", "knn"}, {"k", k}, {"weight", weight.to_string()}};
  if (weight.scheme == WeightScheme::rbf) g.meta["sigma"] = weight.sigma;
  g.validate();
  return g;
}

struct RmdGraphResult {
  Graph graph;
  DegreeProfile profile;  // directed degrees before symmetrization
};

/// Rank-modulated-degree graph: node x links to its modulated_degree(x)
/// nearest neighbors, then the edge set is union-symmetrized. High-rank
/// (dense-region) nodes get up to k(2-lambda) edges, low-rank nodes as few
/// as k*lambda, so neighborhoods thin out exactly where the density does.
inline RmdGraphResult build_rmd_graph(
    const Dataset& data, const RankVector& ranks, int k, double lambda,
    const EdgeWeight& weight = EdgeWeight::unit()) {
  const long n = data.n();
  if (static_cast<long>(ranks.ranks.size()) != n) {
    throw std::invalid_argument("rank vector length does not match dataset");
  }
  if (k < 1 || 2L * k > n - 1) {
    throw std::invalid_argument("k must be in [1, (n-1)/2]");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("lambda must be in [0, 1]");
  }
  std::vector<int> want(n);
  for (long i = 0; i < n; ++i) {
    want[i] = modulated_degree(k, lambda, ranks.ranks[i], n);
  }
  const auto lists = detail::nearest_neighbor_lists(data.points, want);
  RmdGraphResult out;
  out.graph.n = static_cast<int>(n);
  out.graph.edges = detail::symmetrize(data.points, lists, weight);
  out.graph.meta = {{"builder", "rmd"},
                    {"k", k},
                    {"lambda", lambda},
                    {"weight", weight.to_string()}};
  if (weight.scheme == WeightScheme::rbf) out.graph.meta["sigma"] = weight.sigma;
  out.graph.validate();
  out.profile = {std::move(want), k, lambda};
  return out;
}

/// Links every pair within distance eps. Isolated nodes are allowed.
inline Graph build_epsilon_graph(const Dataset& data, double eps,
                                 const EdgeWeight& weight = EdgeWeight::unit()) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be > 0");
  const long n = data.n();
  Graph g;
  g.n = static_cast<int>(n);
  for (long u = 0; u < n; ++u) {
    for (long v = u + 1; v < n; ++v) {
      const double d = (data.points.row(u) - data.points.row(v)).norm();
      if (d <= eps) {
        double w = 1.0;
        if (weight.scheme == WeightScheme::rbf) w = rbf_weight(d, weight.sigma);
        g.edges.push_back({static_cast<int>(u), static_cast<int>(v), w});
      }
    }
  }
  g.meta = {{"builder", "eps"}, {"eps", eps}, {"weight", weight.to_string()}};
  if (weight.scheme == WeightScheme::rbf) g.meta["sigma"] = weight.sigma;
  g.validate();
  return g;
}

/// Complete graph with Gaussian kernel weights.
inline Graph build_full_rbf_graph(const Dataset& data, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
  const long n = data.n();
  Graph g;
  g.n = static_cast<int>(n);
  g.edges.reserve(n * (n - 1) / 2);
  for (long u = 0; u < n; ++u) {
    for (long v = u + 1; v < n; ++v) {
      const double d = (data.points.row(u) - data.points.row(v)).norm();
      g.edges.push_back(
          {static_cast<int>(u), static_cast<int>(v), rbf_weight(d, sigma)});
    }
  }
  g.meta = {{"builder", "full-rbf"}, {"sigma", sigma}, {"weight", "rbf"}};
  g.validate();
  return g;
}

/// Mean distance to the k-th nearest neighbor; the usual scale anchor for
/// sigma and eps grids.
inline double mean_knn_distance(const Dataset& data, int k) {
  const long n = data.n();
  if (k < 1 || k > n - 1) {
    throw std::invalid_argument("k must be in [1, n-1]");
  }
  std::vector<double> kth(n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
    std::vector<double> d2;
    d2.reserve(n - 1);
    for (long j = 0; j < n; ++j) {
      if (static_cast<long>(i) == j) continue;
      d2.push_back((data.points.row(j) - data.points.row(i)).squaredNorm());
    }
    std::nth_element(d2.begin(), d2.begin() + (k - 1), d2.end());
    kth[i] = std::sqrt(d2[k - 1]);
  });
  double sum = 0.0;
  for (double d : kth) sum += d;
  return sum / static_cast<double>(n);
}

/// graph.csv: "u,v,weight" rows; a JSON sidecar <path>.meta.json records
/// the node count plus the builder and its parameters.
inline void save_graph_csv(const Graph& g, const std::string& path) {
  std::string body = "u,v,weight\n";
  for (const auto& e : g.edges) {
    body += std::to_string(e.u) + ',' + std::to_string(e.v) + ',' +
            detail::fmt_double(e.weight) + '\n';
  }
  detail::write_file(path, body);
  nlohmann::json meta = g.meta;
  meta["n"] = g.n;
  detail::write_file(path + ".meta.json", meta.dump(2) + "\n");
}

inline Graph load_graph_csv(const std::string& path) {
  Graph g;
  const auto lines = detail::read_lines(path);
  int max_node = -1;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto t = detail::trim(lines[i]);
    if (t.empty() || (i == 0 && t.substr(0, 2) == "u,")) continue;
    const auto fields = detail::split(std::string(t), ',');
    long u, v;
    double w;
    if (fields.size() != 3 || !detail::parse_int(fields[0], u) ||
        !detail::parse_int(fields[1], v) ||
        !detail::parse_double(fields[2], w)) {
      throw std::runtime_error(path + ": row " + std::to_string(i + 1) +
                               ": expected u,v,weight");
    }
    g.edges.push_back({static_cast<int>(u), static_cast<int>(v), w});
    max_node = std::max<int>(max_node, static_cast<int>(std::max(u, v)));
  }
  std::ifstream meta_in(path + ".meta.json");
  if (meta_in) {
    nlohmann::json meta = nlohmann::json::parse(meta_in);
    g.n = meta.at("n").get<int>();
    meta.erase("n");
    g.meta = meta;
  } else {
    g.n = max_node + 1;
  }
  std::sort(g.edges.begin(), g.edges.end(), [](const Edge& a, const Edge& b) {
    return std::pair(a.u, a.v) < std::pair(b.u, b.v);
  });
  g.validate();
  return g;
}

}  // namespace rmdgraph
