#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "rmdgraph/dataset.hpp"
#include "rmdgraph/detail/eigs.hpp"
#include "rmdgraph/graph.hpp"
#include "rmdgraph/rng.hpp"

namespace rmdgraph {

/// Assignment of n nodes to K clusters. Construction does not require every
/// cluster to be occupied (hyperplane partitions may be one-sided); callers
/// that need a valid clustering check degenerate().
struct Partition {
  std::vector<int> assignment;
  int K = 0;

  static Partition create(std::vector<int> assignment, int K) {
    if (K < 1) throw std::invalid_argument("need K >= 1");
    for (int c : assignment) {
      if (c < 0 || c >= K) throw std::invalid_argument("cluster id out of range");
    }
    return Partition{std::move(assignment), K};
  }

  long n() const { return static_cast<long>(assignment.size()); }

  std::vector<int> sizes() const {
    std::vector<int> s(K, 0);
    for (int c : assignment) ++s[c];
    return s;
  }

  int min_size() const {
    const auto s = sizes();
    return *std::min_element(s.begin(), s.end());
  }

  bool degenerate() const { return min_size() == 0; }

  /// Relabels clusters in order of first appearance (node 0's cluster
  /// becomes 0, and so on). Canonical form for file output and comparisons.
  Partition canonical() const {
    std::vector<int> remap(K, -1);
    int next = 0;
    std::vector<int> out(assignment.size());
    for (std::size_t i = 0; i < assignment.size(); ++i) {
      if (remap[assignment[i]] < 0) remap[assignment[i]] = next++;
      out[i] = remap[assignment[i]];
    }
    return Partition{std::move(out), K};
  }
};

struct CutReport {
  double cut = 0.0;
  double ratio_cut = 0.0;
  double ncut = 0.0;
  std::vector<int> sizes;
  std::vector<double> volumes;
};

/// Graph Laplacian. Unnormalized: L = D - W. Normalized:
/// L = I - D^{-1/2} W D^{-1/2}, where isolated nodes contribute plain
/// identity rows.
inline Eigen::MatrixXd laplacian(const Graph& g, bool normalized) {
  const int n = g.n;
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : g.edges) {
    W(e.u, e.v) += e.weight;
    W(e.v, e.u) += e.weight;
  }
  Eigen::VectorXd deg = W.rowwise().sum();
  if (!normalized) {
    Eigen::MatrixXd L = -W;
    L.diagonal() += deg;
    return L;
  }
  Eigen::VectorXd inv_sqrt(n);
  for (int i = 0; i < n; ++i) {
    inv_sqrt(i) = deg(i) > 0.0 ? 1.0 / std::sqrt(deg(i)) : 0.0;
  }
  Eigen::MatrixXd L =
      -(inv_sqrt.asDiagonal() * W * inv_sqrt.asDiagonal());
  L.diagonal().array() += 1.0;
  return L;
}

/// Crossing weight, ratio cut and normalized cut of a partition. Each
/// undirected edge counts once. For K clusters the balance terms use the
/// total crossing weight: ratio_cut = cut * sum_i 1/|C_i| and
/// ncut = cut * sum_i 1/vol(C_i); for K = 2 these are the classic
/// definitions. A zero-volume cluster sends ncut to +inf unless cut is 0.
inline CutReport cut_metrics(const Graph& g, const Partition& p) {
  if (p.n() != g.n) {
    throw std::invalid_argument("partition length does not match graph");
  }
  CutReport rep;
  rep.sizes = p.sizes();
  for (int c = 0; c < p.K; ++c) {
    if (rep.sizes[c] == 0) {
      throw std::invalid_argument("cluster " + std::to_string(c) +
                                  " is empty");
    }
  }
  rep.volumes.assign(p.K, 0.0);
  for (const auto& e : g.edges) {
    rep.volumes[p.assignment[e.u]] += e.weight;
    rep.volumes[p.assignment[e.v]] += e.weight;
    if (p.assignment[e.u] != p.assignment[e.v]) rep.cut += e.weight;
  }
  double inv_sizes = 0.0;
  for (int c = 0; c < p.K; ++c) inv_sizes += 1.0 / rep.sizes[c];
  rep.ratio_cut = rep.cut * inv_sizes;
  if (rep.cut == 0.0) {
    rep.ncut = 0.0;
  } else {
    double inv_vol = 0.0;
    for (int c = 0; c < p.K; ++c) {
      if (rep.volumes[c] == 0.0) {
        inv_vol = std::numeric_limits<double>::infinity();
        break;
      }
      inv_vol += 1.0 / rep.volumes[c];
    }
    rep.ncut = rep.cut * inv_vol;
  }
  return rep;
}

namespace detail {

/// Best threshold split of the Fiedler vector: nodes are ordered by
/// (value, index) and all n-1 prefix/suffix splits are scored by ratio cut
/// in one O(E + n log n) sweep. Ties prefer the larger minority side, then
/// the earlier split, which keeps zero-cut component splits usable under
/// minimum-size constraints.
inline Partition fiedler_split(const Graph& g, const Eigen::VectorXd& fiedler) {
  const int n = g.n;
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return std::pair(fiedler(a), a) < std::pair(fiedler(b), b);
  });

  const auto adj = g.adjacency();
  std::vector<double> wdeg(n, 0.0);
  for (const auto& e : g.edges) {
    wdeg[e.u] += e.weight;
    wdeg[e.v] += e.weight;
  }

  std::vector<double> to_left(n, 0.0);
  double cut = 0.0;
  double best_rc = std::numeric_limits<double>::infinity();
  int best_split = -1, best_min_side = -1;
  for (int s = 1; s < n; ++s) {
    const int v = order[s - 1];
    cut += wdeg[v] - 2.0 * to_left[v];
    for (const auto& [u, w] : adj[v]) to_left[u] += w;
    const double rc = cut * (1.0 / s + 1.0 / (n - s));
    const int min_side = std::min(s, n - s);
    if (rc < best_rc ||
        (rc == best_rc && min_side > best_min_side)) {
      best_rc = rc;
      best_split = s;
      best_min_side = min_side;
    }
  }

  std::vector<int> assign(n, 1);
  for (int i = 0; i < best_split; ++i) assign[order[i]] = 0;
  return Partition::create(std::move(assign), 2);
}

struct KmeansResult {
  std::vector<int> assignment;
  double objective = std::numeric_limits<double>::infinity();
  bool degenerate = true;
};

// Lloyd iterations with k-means++ seeding. Assignment ties go to the
// lowest cluster id.
inline KmeansResult kmeans_once(const Eigen::MatrixXd& X, int K, Rng& rng,
                                int max_iters) {
  const long n = X.rows();
  Eigen::MatrixXd centers(K, X.cols());
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  centers.row(0) = X.row(rng.index(n));
  for (int c = 1; c < K; ++c) {
    double total = 0.0;
    for (long i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], (X.row(i) - centers.row(c - 1)).squaredNorm());
      total += d2[i];
    }
    long pick = 0;
    if (total > 0.0) {
      const double u = rng.uniform01() * total;
      double cum = 0.0;
      for (long i = 0; i < n; ++i) {
        cum += d2[i];
        if (u < cum) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.index(n);
    }
    centers.row(c) = X.row(pick);
  }

  KmeansResult res;
  res.assignment.assign(n, 0);
  for (int it = 0; it < max_iters; ++it) {
    bool changed = false;
    for (long i = 0; i < n; ++i) {
      int best = 0;
      double bd = (X.row(i) - centers.row(0)).squaredNorm();
      for (int c = 1; c < K; ++c) {
        const double d = (X.row(i) - centers.row(c)).squaredNorm();
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      if (res.assignment[i] != best) {
        res.assignment[i] = best;
        changed = true;
      }
    }
    std::vector<long> counts(K, 0);
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(K, X.cols());
    for (long i = 0; i < n; ++i) {
      ++counts[res.assignment[i]];
      sums.row(res.assignment[i]) += X.row(i);
    }
    for (int c = 0; c < K; ++c) {
      if (counts[c] == 0) return res;  // degenerate restart
      centers.row(c) = sums.row(c) / static_cast<double>(counts[c]);
    }
    if (!changed) break;
  }
  res.objective = 0.0;
  for (long i = 0; i < n; ++i) {
    res.objective += (X.row(i) - centers.row(res.assignment[i])).squaredNorm();
  }
  res.degenerate = false;
  return res;
}

}  // namespace detail

/// Spectral clustering. Nodes are embedded with the K eigenvectors of
/// smallest eigenvalue of the (un)normalized Laplacian. K = 2 thresholds
/// the Fiedler vector at the ratio-cut-optimal split, which is
/// deterministic; K >= 3 runs seeded k-means (10 restarts, 100 iterations)
/// on the embedding rows. Clusters come back relabeled in first-appearance
/// order and are all non-empty.
inline Partition spectral_cluster(const Graph& g, int K, bool normalized,
                                  std::uint64_t seed) {
  if (K < 2) throw std::invalid_argument("need K >= 2");
  if (K > g.n) throw std::invalid_argument("need K <= n");
  const Eigen::MatrixXd L = laplacian(g, normalized);
  const auto [values, vectors] = detail::smallest_eigenpairs(L, K);
  (void)values;

  if (K == 2) {
    return detail::fiedler_split(g, vectors.col(1)).canonical();
  }

  constexpr int kRestarts = 10;
  detail::KmeansResult best;
  for (int r = 0; r < kRestarts; ++r) {
    Rng rng(derive_seed(seed, "kmeans-restart", static_cast<std::uint64_t>(r)));
    auto res = detail::kmeans_once(vectors, K, rng, 100);
    if (!res.degenerate && res.objective < best.objective) best = std::move(res);
  }
  if (best.degenerate) {
    throw std::runtime_error(
        "k-means produced an empty cluster in every restart");
  }
  return Partition::create(std::move(best.assignment), K).canonical();
}

struct Hyperplane {
  Eigen::VectorXd normal;
  double offset = 0.0;

  static Hyperplane axis(int axis, double offset, long dim) {
    Eigen::VectorXd n = Eigen::VectorXd::Zero(dim);
    n(axis) = 1.0;
    return {n, offset};
  }
};

/// Signed side of a hyperplane: cluster 1 where x.normal > offset, cluster 0
/// where below. Points exactly on the plane are assigned by a seeded coin.
/// The result may be one-sided (degenerate) and is flagged as such.
inline Partition hyperplane_partition(const Dataset& data,
                                      const Hyperplane& plane,
                                      std::uint64_t seed) {
  if (plane.normal.size() != data.dim() || plane.normal.norm() == 0.0) {
    throw std::invalid_argument("hyperplane normal must be nonzero and match d");
  }
  Rng rng(derive_seed(seed, "hyperplane-ties"));
  std::vector<int> assign(data.n());
  for (long i = 0; i < data.n(); ++i) {
    const double s = data.points.row(i).dot(plane.normal) - plane.offset;
    assign[i] = s > 0.0 ? 1 : (s < 0.0 ? 0 : static_cast<int>(rng.index(2)));
  }
  return Partition::create(std::move(assign), 2);
}

struct CutRatioStats {
  double q = 0.0;  // cut(valley) / cut(balanced)
  double y = 0.0;  // smaller-side fraction of the valley split
};

/// Cut ratio q between an unbalanced (valley) hyperplane split and a
/// balanced one, plus the minority fraction y of the valley split.
inline CutRatioStats cut_ratio_stats(const Dataset& data, const Graph& g,
                                     const Hyperplane& s_u,
                                     const Hyperplane& s_b,
                                     std::uint64_t seed) {
  const Partition pu = hyperplane_partition(data, s_u, derive_seed(seed, "su"));
  const Partition pb = hyperplane_partition(data, s_b, derive_seed(seed, "sb"));
  if (pu.degenerate() || pb.degenerate()) {
    throw std::invalid_argument("hyperplane leaves one side empty");
  }
  const double cu = cut_metrics(g, pu).cut;
  const double cb = cut_metrics(g, pb).cut;
  if (cb == 0.0) {
    throw std::runtime_error("graph is disconnected across the balanced cut");
  }
  const auto sizes = pu.sizes();
  return {cu / cb,
          static_cast<double>(std::min(sizes[0], sizes[1])) / data.n()};
}

/// First principal axis of the point cloud, oriented so its largest-|.|
/// component is positive.
inline Eigen::VectorXd principal_axis(const Dataset& data) {
  const Eigen::RowVectorXd mean = data.points.colwise().mean();
  const Eigen::MatrixXd centered = data.points.rowwise() - mean;
  const Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(data.n());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  Eigen::VectorXd axis = es.eigenvectors().col(data.dim() - 1);
  int arg = 0;
  for (long j = 1; j < axis.size(); ++j) {
    if (std::abs(axis(j)) > std::abs(axis(arg))) arg = static_cast<int>(j);
  }
  if (axis(arg) < 0.0) axis = -axis;
  return axis;
}

/// 1-D position of a 2-way partition boundary along a projection axis: the
/// threshold on projected values that best agrees with the assignment
/// (mean of all optimal split midpoints). NaN for degenerate partitions.
inline double boundary_position(const Dataset& data, const Partition& p,
                                const Eigen::VectorXd& axis) {
  if (p.K != 2) throw std::invalid_argument("boundary position needs K == 2");
  if (p.degenerate()) return std::numeric_limits<double>::quiet_NaN();
  const long n = data.n();
  std::vector<int> order(n);
  for (long i = 0; i < n; ++i) order[i] = static_cast<int>(i);
  std::vector<double> proj(n);
  for (long i = 0; i < n; ++i) proj[i] = data.points.row(i).dot(axis);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return std::pair(proj[a], a) < std::pair(proj[b], b);
  });

  const auto sizes = p.sizes();
  long left0 = 0, left1 = 0;
  long best_mis = n + 1;
  double mid_sum = 0.0;
  long mid_count = 0;
  for (long s = 1; s < n; ++s) {
    const int c = p.assignment[order[s - 1]];
    if (c == 0) {
      ++left0;
    } else {
      ++left1;
    }
    // errors if the left side is cluster 0, or if it is cluster 1
    const long mis0 = left1 + (sizes[0] - left0);
    const long mis1 = left0 + (sizes[1] - left1);
    const long mis = std::min(mis0, mis1);
    const double mid = 0.5 * (proj[order[s - 1]] + proj[order[s]]);
    if (mis < best_mis) {
      best_mis = mis;
      mid_sum = mid;
      mid_count = 1;
    } else if (mis == best_mis) {
      mid_sum += mid;
      ++mid_count;
    }
  }
  return mid_sum / static_cast<double>(mid_count);
}

/// partition.csv: "index,cluster".
inline void save_partition_csv(const Partition& p, const std::string& path) {
  std::string body = "index,cluster\n";
  for (long i = 0; i < p.n(); ++i) {
    body += std::to_string(i) + ',' + std::to_string(p.assignment[i]) + '\n';
  }
  detail::write_file(path, body);
}

inline Partition load_partition_csv(const std::string& path) {
  const auto lines = detail::read_lines(path);
  std::vector<int> assign;
  int K = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto t = detail::trim(lines[i]);
    if (t.empty() || (i == 0 && t.substr(0, 5) == "index")) continue;
    const auto fields = detail::split(std::string(t), ',');
    long idx, c;
    if (fields.size() != 2 || !detail::parse_int(fields[0], idx) ||
        !detail::parse_int(fields[1], c) || c < 0) {
      throw std::runtime_error(path + ": row " + std::to_string(i + 1) +
                               ": expected index,cluster");
    }
    if (idx != static_cast<long>(assign.size())) {
      throw std::runtime_error(path + ": row " + std::to_string(i + 1) +
                               ": indices must be consecutive from 0");
    }
    assign.push_back(static_cast<int>(c));
    K = std::max<int>(K, static_cast<int>(c) + 1);
  }
  if (assign.empty()) throw std::runtime_error(path + ": no partition rows");
  return Partition::create(std::move(assign), K);
}

}  // namespace rmdgraph
