#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "rmdgraph/dataset.hpp"
#include "rmdgraph/parallel.hpp"
#include "rmdgraph/rng.hpp"

namespace rmdgraph {

enum class StatKind { avg_knn, weighted_avg_knn, lnn_distance, eps_count };

/// Nearest-neighbor statistic used to order points by local density.
/// Smaller statistic always means denser surroundings; the eps_count
/// variant therefore returns the negated neighbor count so that all four
/// variants share the same orientation.
struct StatVariant {
  StatKind kind = StatKind::avg_knn;
  int l = 1;         // neighbor scale (ignored by eps_count)
  double eps = 0.0;  // radius (eps_count only)

  static StatVariant avg_knn(int l) { return {StatKind::avg_knn, l, 0.0}; }
  static StatVariant weighted_avg_knn(int l) {
    return {StatKind::weighted_avg_knn, l, 0.0};
  }
  static StatVariant lnn_distance(int l) {
    return {StatKind::lnn_distance, l, 0.0};
  }
  static StatVariant eps_count(double eps) {
    return {StatKind::eps_count, 1, eps};
  }

  bool neighbor_based() const { return kind != StatKind::eps_count; }

  /// Smallest reference-set size the statistic is defined for.
  int min_refset_size() const {
    switch (kind) {
      case StatKind::avg_knn:
      case StatKind::weighted_avg_knn:
        return l + l / 2;
      case StatKind::lnn_distance:
        return l;
      case StatKind::eps_count:
        return 1;
    }
    return 1;
  }

  void validate() const {
    if (neighbor_based() && l < 1) {
      throw std::invalid_argument("neighbor statistic needs l >= 1");
    }
    if (kind == StatKind::eps_count && !(eps > 0.0)) {
      throw std::invalid_argument("eps_count needs eps > 0");
    }
  }

  std::string to_string() const {
    switch (kind) {
      case StatKind::avg_knn:
        return "avg-knn";
      case StatKind::weighted_avg_knn:
        return "weighted-avg-knn";
      case StatKind::lnn_distance:
        return "lnn";
      case StatKind::eps_count:
        return "eps-count";
    }
    return "?";
  }

  static StatKind kind_from_string(const std::string& s) {
    if (s == "avg-knn") return StatKind::avg_knn;
    if (s == "weighted-avg-knn") return StatKind::weighted_avg_knn;
    if (s == "lnn") return StatKind::lnn_distance;
    if (s == "eps-count") return StatKind::eps_count;
    throw std::invalid_argument("unknown statistic variant '" + s + "'");
  }
};

/// Per-point density ranks plus the raw statistic values that produced them.
struct RankVector {
  std::vector<double> ranks;      // each in (0, 1]
  std::vector<double> statistic;  // statistic from the last resample a point took part in
  StatVariant variant;
  int B = 1;
  std::uint64_t seed = 0;
};

/// Evaluates the density statistic for a query point against a reference
/// set. `skip_row` excludes one reference row (used when the query itself
/// belongs to the set); distinct points at identical coordinates still count.
///
/// avg_knn averages the sorted reference distances D_(i) for
/// i = l - floor((l-1)/2) .. l + floor(l/2), a window of exactly l terms
/// centered on the l-th neighbor; the weighted variant scales each term by
/// (l/i)^(1/d).
inline double neighbor_statistic(const Eigen::RowVectorXd& x,
                                 const Eigen::MatrixXd& refset,
                                 const StatVariant& variant,
                                 long skip_row = -1) {
  variant.validate();
  const long m_all = refset.rows();
  std::vector<double> dist;
  dist.reserve(m_all);
  for (long r = 0; r < m_all; ++r) {
    if (r == skip_row) continue;
    dist.push_back((refset.row(r) - x).norm());
  }
  const int m = static_cast<int>(dist.size());
  const int need = variant.min_refset_size();
  if (m < need) {
    throw std::invalid_argument(
        "reference set too small for statistic: need at least " +
        std::to_string(need) + " points, got " + std::to_string(m));
  }

  if (variant.kind == StatKind::eps_count) {
    long count = 0;
    for (double d : dist) {
      if (d <= variant.eps) ++count;
    }
    return -static_cast<double>(count);
  }

  const int l = variant.l;
  if (variant.kind == StatKind::lnn_distance) {
    std::nth_element(dist.begin(), dist.begin() + (l - 1), dist.end());
    return dist[l - 1];
  }

  const int lo = l - (l - 1) / 2;  // 1-based window bounds, exactly l terms
  const int hi = l + l / 2;
  std::nth_element(dist.begin(), dist.begin() + (hi - 1), dist.end());
  std::sort(dist.begin(), dist.begin() + hi);

  const double d_inv = 1.0 / static_cast<double>(x.size());
  double sum = 0.0;
  for (int i = lo; i <= hi; ++i) {
    double term = dist[i - 1];
    if (variant.kind == StatKind::weighted_avg_knn) {
      term *= std::pow(static_cast<double>(l) / i, d_inv);
    }
    sum += term;
  }
  return sum / l;
}

namespace detail {

/// Rank of each value within `values` under the <=-indicator: the fraction
/// of entries (including self) that are >= the entry's own value. Ties lift
/// every tied entry.
inline void ranks_within(const std::vector<double>& values,
                         std::vector<double>& out) {
  const std::size_t m = values.size();
  std::vector<double> sorted(values);
  std::sort(sorted.begin(), sorted.end());
  out.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto below =
        std::lower_bound(sorted.begin(), sorted.end(), values[i]) -
        sorted.begin();
    out[i] = static_cast<double>(m - below) / static_cast<double>(m);
  }
}

}  // namespace detail

/// Density rank of every point by U-statistic resampling.
///
/// Each of the B resamples splits the data into two equal halves. Points of
/// one half evaluate their statistic against the other half, then are ranked
/// within their own half (self included, so ranks live in [1/m, 1]). The
/// final rank is the mean over the resamples a point took part in. With odd
/// n one uniformly chosen point sits out per resample; a point that never
/// participates (only possible when B == 1) gets rank 0.5.
///
/// Deterministic for a fixed seed: the split permutations derive from
/// (seed, resample index) and the averaging order is fixed.
inline RankVector compute_ranks(const Dataset& data, const StatVariant& variant,
                                int B, std::uint64_t seed) {
  variant.validate();
  if (B < 1) throw std::invalid_argument("need B >= 1");
  const long n = data.n();
  const long m = n / 2;
  const int need = variant.min_refset_size();
  if (m < need) {
    throw std::invalid_argument(
        "dataset too small for rank computation: need n >= " +
        std::to_string(2 * need) + ", got " + std::to_string(n));
  }

  std::vector<double> rank_sum(n, 0.0);
  std::vector<int> participations(n, 0);
  std::vector<double> statistic(n,
                                std::numeric_limits<double>::quiet_NaN());
  std::vector<int> perm(n);

  for (int b = 0; b < B; ++b) {
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(derive_seed(seed, "rank-split", static_cast<std::uint64_t>(b)));
    rng.shuffle(perm);

    Eigen::MatrixXd half1(m, data.dim()), half2(m, data.dim());
    for (long i = 0; i < m; ++i) {
      half1.row(i) = data.points.row(perm[i]);
      half2.row(i) = data.points.row(perm[m + i]);
    }

    std::vector<double> g1(m), g2(m);
    parallel_for(static_cast<std::size_t>(2 * m), [&](std::size_t t) {
      const long i = static_cast<long>(t % m);
      if (t < static_cast<std::size_t>(m)) {
        g1[i] = neighbor_statistic(half1.row(i), half2, variant);
      } else {
        g2[i] = neighbor_statistic(half2.row(i), half1, variant);
      }
    });

    std::vector<double> r1, r2;
    detail::ranks_within(g1, r1);
    detail::ranks_within(g2, r2);
    for (long i = 0; i < m; ++i) {
      rank_sum[perm[i]] += r1[i];
      ++participations[perm[i]];
      statistic[perm[i]] = g1[i];
      rank_sum[perm[m + i]] += r2[i];
      ++participations[perm[m + i]];
      statistic[perm[m + i]] = g2[i];
    }
  }

  RankVector result;
  result.ranks.resize(n);
  for (long i = 0; i < n; ++i) {
    result.ranks[i] = participations[i]
                          ? rank_sum[i] / participations[i]
                          : 0.5;
    if (participations[i] == 0) {
      // Held out of every resample; record a statistic against all other
      // points so the diagnostic column stays meaningful.
      statistic[i] = neighbor_statistic(data.points.row(i), data.points,
                                        variant, i);
    }
  }
  result.statistic = std::move(statistic);
  result.variant = variant;
  result.B = B;
  result.seed = seed;
  return result;
}

/// ranks.csv: "index,rank,statistic".
inline void save_ranks_csv(const RankVector& rv, const std::string& path) {
  std::string body = "index,rank,statistic\n";
  for (std::size_t i = 0; i < rv.ranks.size(); ++i) {
    body += std::to_string(i) + ',' + detail::fmt_double(rv.ranks[i]) + ',' +
            detail::fmt_double(rv.statistic[i]) + '\n';
  }
  detail::write_file(path, body);
}

inline RankVector load_ranks_csv(const std::string& path) {
  const auto lines = detail::read_lines(path);
  RankVector rv;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto t = detail::trim(lines[i]);
    if (t.empty() || (i == 0 && t.substr(0, 5) == "index")) continue;
    const auto fields = detail::split(std::string(t), ',');
    if (fields.size() != 3) {
      throw std::runtime_error(path + ": row " + std::to_string(i + 1) +
                               ": expected index,rank,statistic");
    }
    double rank, stat;
    long idx;
    if (!detail::parse_int(fields[0], idx) ||
        !detail::parse_double(fields[1], rank) ||
        !detail::parse_double(fields[2], stat)) {
      throw std::runtime_error(path + ": row " + std::to_string(i + 1) +
                               ": malformed value");
    }
    if (idx != static_cast<long>(rv.ranks.size())) {
      throw std::runtime_error(path + ": row " + std::to_string(i + 1) +
                               ": indices must be consecutive from 0");
    }
    rv.ranks.push_back(rank);
    rv.statistic.push_back(stat);
  }
  if (rv.ranks.empty()) throw std::runtime_error(path + ": no rank rows");
  return rv;
}

}  // namespace rmdgraph
