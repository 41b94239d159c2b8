// Test-only oracles and fixtures, independent of the library code paths
// they are used to check.

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <tuple>
#include <vector>

#include "rmdgraph/graph.hpp"
#include "rmdgraph/rng.hpp"
#include "rmdgraph/spectral.hpp"

namespace oracles {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

inline rmdgraph::Graph make_graph(
    int n, std::vector<std::tuple<int, int, double>> edges) {
  rmdgraph::Graph g;
  g.n = n;
  for (auto [u, v, w] : edges) {
    g.edges.push_back({std::min(u, v), std::max(u, v), w});
  }
  std::sort(g.edges.begin(), g.edges.end(),
            [](const rmdgraph::Edge& a, const rmdgraph::Edge& b) {
              return std::pair(a.u, a.v) < std::pair(b.u, b.v);
            });
  g.validate();
  return g;
}

inline rmdgraph::Graph path_graph(int n) {
  std::vector<std::tuple<int, int, double>> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1, 1.0);
  return make_graph(n, std::move(e));
}

inline rmdgraph::Graph cycle_graph(int n) {
  std::vector<std::tuple<int, int, double>> e;
  for (int i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n, 1.0);
  return make_graph(n, std::move(e));
}

/// Two complete unit-weight cliques of sizes a and b; `bridges` extra edges
/// connect node 0 of each clique.
inline rmdgraph::Graph two_cliques(int a, int b, int bridges = 0) {
  std::vector<std::tuple<int, int, double>> e;
  for (int i = 0; i < a; ++i) {
    for (int j = i + 1; j < a; ++j) e.emplace_back(i, j, 1.0);
  }
  for (int i = 0; i < b; ++i) {
    for (int j = i + 1; j < b; ++j) e.emplace_back(a + i, a + j, 1.0);
  }
  for (int t = 0; t < bridges; ++t) e.emplace_back(t % a, a + t % b, 1.0);
  return make_graph(a + b, std::move(e));
}

inline rmdgraph::Graph complete_graph(int n) { return two_cliques(n, 0); }

inline rmdgraph::Graph random_graph(int n, double p, std::uint64_t seed,
                                    bool random_weights = true) {
  rmdgraph::Rng rng(seed);
  std::vector<std::tuple<int, int, double>> e;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (rng.uniform01() < p) {
        e.emplace_back(i, j, random_weights ? rng.uniform(0.1, 2.0) : 1.0);
      }
    }
  }
  // keep it connected so cut oracles stay simple
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1, 1.0);
  std::sort(e.begin(), e.end());
  e.erase(std::unique(e.begin(), e.end(),
                      [](const auto& a, const auto& b) {
                        return std::get<0>(a) == std::get<0>(b) &&
                               std::get<1>(a) == std::get<1>(b);
                      }),
          e.end());
  return make_graph(n, std::move(e));
}

inline double cut_of_mask(const rmdgraph::Graph& g, std::uint32_t mask) {
  double cut = 0.0;
  for (const auto& e : g.edges) {
    const bool su = (mask >> e.u) & 1u;
    const bool sv = (mask >> e.v) & 1u;
    if (su != sv) cut += e.weight;
  }
  return cut;
}

struct BruteForceCut {
  double ratio_cut = std::numeric_limits<double>::infinity();
  double cut = 0.0;
  std::uint32_t mask = 0;
};

/// Exhaustive minimum ratio cut over all 2^(n-1)-1 bipartitions (n <= 20).
inline BruteForceCut brute_force_min_ratiocut(const rmdgraph::Graph& g) {
  const int n = g.n;
  BruteForceCut best;
  for (std::uint32_t mask = 1; mask < (1u << n) - 1u; ++mask) {
    const int a = __builtin_popcount(mask);
    const double cut = cut_of_mask(g, mask);
    const double rc = cut * (1.0 / a + 1.0 / (n - a));
    if (rc < best.ratio_cut) {
      best.ratio_cut = rc;
      best.cut = cut;
      best.mask = mask;
    }
  }
  return best;
}

inline rmdgraph::Dataset random_dataset(long n, long d, std::uint64_t seed) {
  rmdgraph::Rng rng(seed);
  Eigen::MatrixXd pts(n, d);
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < d; ++j) pts(i, j) = rng.normal();
  }
  return rmdgraph::Dataset::create(std::move(pts));
}

/// Two tight, far-apart blobs; the canonical zero-cut clustering input.
inline rmdgraph::Dataset two_blob_dataset(long per_side, std::uint64_t seed,
                                          double gap = 10.0) {
  rmdgraph::Rng rng(seed);
  Eigen::MatrixXd pts(2 * per_side, 2);
  std::vector<int> labels(2 * per_side);
  for (long i = 0; i < 2 * per_side; ++i) {
    const bool right = i >= per_side;
    pts(i, 0) = (right ? gap : 0.0) + 0.3 * rng.normal();
    pts(i, 1) = 0.3 * rng.normal();
    labels[i] = right ? 1 : 0;
  }
  return rmdgraph::Dataset::create(std::move(pts), std::move(labels));
}

}  // namespace oracles
