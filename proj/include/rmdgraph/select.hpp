#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "rmdgraph/dataset.hpp"
#include "rmdgraph/graph.hpp"
#include "rmdgraph/rank.hpp"
#include "rmdgraph/spectral.hpp"

namespace rmdgraph {

/// One evaluated grid configuration. `sigma` and `eps` are NaN where the
/// method has none; `position` is the 1-D boundary descriptor (K = 2 only).
struct TraceEntry {
  double lambda = std::numeric_limits<double>::quiet_NaN();
  int k = 0;
  double sigma = std::numeric_limits<double>::quiet_NaN();
  double cut = 0.0;
  double min_fraction = 0.0;
  bool feasible = false;
  double position = std::numeric_limits<double>::quiet_NaN();
  Partition partition;
};

struct SelectionResult {
  TraceEntry chosen;
  double objective = 0.0;  // cut value of the chosen configuration
  std::vector<TraceEntry> trace;
};

class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(std::string what, std::vector<TraceEntry> trace)
      : std::runtime_error(std::move(what)), trace(std::move(trace)) {}
  std::vector<TraceEntry> trace;
};

/// Parameters of a rank-modulated graph clustering run.
struct RmdParams {
  int k = 30;
  int l = 30;  // neighbor scale of the rank statistic
  int B = 5;
  StatKind statistic = StatKind::avg_knn;
  EdgeWeight weight = EdgeWeight::unit();
  std::vector<double> lambda_grid = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  int K = 2;
  bool normalized = false;
};

namespace detail {

inline bool size_feasible(int min_size, double delta, long n) {
  return static_cast<double>(min_size) >= delta * static_cast<double>(n) - 1e-9;
}

/// Ranks once, then one clustering per lambda. The grid is
/// delta-independent, so constrained selection and the delta sweep share
/// this evaluation.
inline std::vector<TraceEntry> evaluate_lambda_grid(const Dataset& data,
                                                    const RmdParams& params,
                                                    std::uint64_t seed) {
  if (params.lambda_grid.empty()) {
    throw std::invalid_argument("lambda grid must be non-empty");
  }
  StatVariant variant{params.statistic, params.l, 0.0};
  const RankVector ranks =
      compute_ranks(data, variant, params.B, derive_seed(seed, "ranks"));
  const Eigen::VectorXd axis = principal_axis(data);

  std::vector<TraceEntry> trace;
  trace.reserve(params.lambda_grid.size());
  for (std::size_t li = 0; li < params.lambda_grid.size(); ++li) {
    const double lambda = params.lambda_grid[li];
    const auto built = build_rmd_graph(data, ranks, params.k, lambda,
                                       params.weight);
    TraceEntry e;
    e.lambda = lambda;
    e.k = params.k;
    e.partition = spectral_cluster(built.graph, params.K, params.normalized,
                                   derive_seed(seed, "sc", li));
    e.cut = cut_metrics(built.graph, e.partition).cut;
    e.min_fraction = static_cast<double>(e.partition.min_size()) /
                     static_cast<double>(data.n());
    if (params.K == 2) e.position = boundary_position(data, e.partition, axis);
    trace.push_back(std::move(e));
  }
  return trace;
}

/// Feasible minimizer of the cut. Ties prefer smaller lambda, then smaller
/// k, then smaller sigma (grid order encodes all three).
inline SelectionResult pick_feasible_min(std::vector<TraceEntry> trace,
                                         double delta, long n,
                                         const std::string& what) {
  int best = -1;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    trace[i].feasible =
        size_feasible(trace[i].partition.min_size(), delta, n);
    if (trace[i].feasible &&
        (best < 0 || trace[i].cut < trace[best].cut)) {
      best = static_cast<int>(i);
    }
  }
  if (best < 0) {
    throw InfeasibleError(what + ": no grid point satisfies the minimum "
                          "cluster size " + std::to_string(delta),
                          std::move(trace));
  }
  SelectionResult res;
  res.chosen = trace[best];
  res.objective = trace[best].cut;
  res.trace = std::move(trace);
  return res;
}

}  // namespace detail

/// Constrained cut minimization over the lambda grid: cluster once per
/// lambda on the rank-modulated graph (one shared rank vector) and return
/// the smallest cut whose minority cluster holds at least delta * n points.
inline SelectionResult optimize_lambda(const Dataset& data,
                                       const RmdParams& params, double delta,
                                       std::uint64_t seed) {
  if (!(delta > 0.0 && delta < 1.0 / params.K)) {
    throw std::invalid_argument("delta must be in (0, 1/K)");
  }
  auto trace = detail::evaluate_lambda_grid(data, params, seed);
  return detail::pick_feasible_min(std::move(trace), delta, data.n(),
                                   "lambda selection");
}

struct BaselineParams {
  std::string method = "knn";  // knn | full-rbf | eps
  std::vector<int> k_grid = {20, 30, 40, 50, 60, 70, 80, 90, 100};
  std::vector<int> sigma_exponents = {-4, -3, -2, -1, 0, 1, 2, 3, 4};
  int K = 2;
  bool normalized = false;
};

/// The same constrained minimization for a conventional graph family over
/// (k, sigma) with sigma = 2^j * mean k-NN distance. The k-NN baseline uses
/// Gaussian edge weights, full-rbf is fully connected, and the eps graph
/// thresholds at eps = sigma with unit weights.
inline SelectionResult optimize_baseline(const Dataset& data,
                                         const BaselineParams& params,
                                         double delta, std::uint64_t seed) {
  if (params.k_grid.empty() || params.sigma_exponents.empty()) {
    throw std::invalid_argument("baseline grids must be non-empty");
  }
  if (!(delta > 0.0 && delta < 1.0 / params.K)) {
    throw std::invalid_argument("delta must be in (0, 1/K)");
  }
  if (params.method != "knn" && params.method != "full-rbf" &&
      params.method != "eps") {
    throw std::invalid_argument("unknown baseline method '" + params.method +
                                "'");
  }
  std::vector<TraceEntry> trace;
  std::size_t cell = 0;
  for (int k : params.k_grid) {
    const double scale = mean_knn_distance(data, k);
    for (int j : params.sigma_exponents) {
      const double sigma = std::ldexp(scale, j);
      Graph g;
      if (params.method == "knn") {
        g = build_knn_graph(data, k, EdgeWeight::rbf(sigma));
      } else if (params.method == "full-rbf") {
        g = build_full_rbf_graph(data, sigma);
      } else {
        g = build_epsilon_graph(data, sigma, EdgeWeight::unit());
      }
      TraceEntry e;
      e.k = k;
      e.sigma = sigma;
      e.partition = spectral_cluster(g, params.K, params.normalized,
                                     derive_seed(seed, "sc", cell));
      e.cut = cut_metrics(g, e.partition).cut;
      e.min_fraction = static_cast<double>(e.partition.min_size()) /
                       static_cast<double>(data.n());
      trace.push_back(std::move(e));
      ++cell;
    }
  }
  return detail::pick_feasible_min(std::move(trace), delta, data.n(),
                                   "baseline selection");
}

struct DeltaPoint {
  double delta = 0.0;
  bool feasible = false;
  double cut = std::numeric_limits<double>::quiet_NaN();
  double position = std::numeric_limits<double>::quiet_NaN();
  double lambda = std::numeric_limits<double>::quiet_NaN();
};

struct FlatSegment {
  int first = 0;  // indices into the delta grid
  int last = 0;
  double delta_high = 0.0;
  double delta_low = 0.0;
  double mean_cut = 0.0;
  double mean_position = 0.0;

  int length() const { return last - first + 1; }
};

struct DeltaCurve {
  std::vector<DeltaPoint> points;      // in the given (descending) delta order
  std::vector<FlatSegment> flats;
};

/// Maximal runs of >= min_run consecutive feasible grid points whose cut
/// changes by at most rel_tol (relatively) and whose boundary position moves
/// by at most pos_tol. Such plateaus mark cluster-size ranges where the
/// constrained optimum stopped moving, i.e. a stable small cluster.
inline std::vector<FlatSegment> detect_flat_spots(const DeltaCurve& curve,
                                                  double rel_tol = 0.05,
                                                  double pos_tol = 0.5,
                                                  int min_run = 3) {
  const auto& pts = curve.points;
  if (pts.size() < 3) {
    throw std::invalid_argument("delta curve needs at least 3 grid points");
  }
  auto flat_step = [&](const DeltaPoint& a, const DeltaPoint& b) {
    if (!a.feasible || !b.feasible) return false;
    const double scale = std::max(std::abs(a.cut), std::abs(b.cut));
    const bool cut_ok =
        scale <= 1e-12 || std::abs(a.cut - b.cut) <= rel_tol * scale;
    return cut_ok && std::abs(a.position - b.position) <= pos_tol;
  };
  std::vector<FlatSegment> out;
  std::size_t i = 0;
  while (i < pts.size()) {
    if (!pts[i].feasible) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < pts.size() && flat_step(pts[j], pts[j + 1])) ++j;
    const int len = static_cast<int>(j - i + 1);
    if (len >= min_run) {
      FlatSegment seg;
      seg.first = static_cast<int>(i);
      seg.last = static_cast<int>(j);
      seg.delta_high = pts[i].delta;
      seg.delta_low = pts[j].delta;
      double cs = 0.0, ps = 0.0;
      for (std::size_t t = i; t <= j; ++t) {
        cs += pts[t].cut;
        ps += pts[t].position;
      }
      seg.mean_cut = cs / len;
      seg.mean_position = ps / len;
      out.push_back(seg);
    }
    i = j + 1;
  }
  return out;
}

/// Constrained optimum as a function of the cluster-size threshold. The
/// lambda grid is evaluated once (it does not depend on delta); each delta
/// then reads its feasible minimizer off the shared trace, which is exactly
/// optimize_lambda on the same seed. Infeasible deltas are recorded, not
/// fatal. The optimal cut is non-increasing as delta shrinks by
/// construction.
inline DeltaCurve delta_sweep(const Dataset& data, const RmdParams& params,
                              const std::vector<double>& deltas,
                              std::uint64_t seed, double rel_tol = 0.05,
                              double pos_tol = 0.5) {
  if (deltas.empty()) throw std::invalid_argument("delta grid is empty");
  for (std::size_t i = 0; i + 1 < deltas.size(); ++i) {
    if (!(deltas[i] > deltas[i + 1])) {
      throw std::invalid_argument("delta grid must be strictly descending");
    }
  }
  auto trace = detail::evaluate_lambda_grid(data, params, seed);

  DeltaCurve curve;
  double prev_cut = std::numeric_limits<double>::infinity();
  for (double delta : deltas) {
    DeltaPoint pt;
    pt.delta = delta;
    int best = -1;
    for (std::size_t i = 0; i < trace.size(); ++i) {
      if (detail::size_feasible(trace[i].partition.min_size(), delta,
                                data.n()) &&
          (best < 0 || trace[i].cut < trace[best].cut)) {
        best = static_cast<int>(i);
      }
    }
    if (best >= 0) {
      pt.feasible = true;
      pt.cut = trace[best].cut;
      pt.position = trace[best].position;
      pt.lambda = trace[best].lambda;
      if (pt.cut > prev_cut + 1e-12) {
        throw std::logic_error("delta sweep produced an increasing cut");
      }
      prev_cut = pt.cut;
    }
    curve.points.push_back(pt);
  }
  if (curve.points.size() >= 3) {
    curve.flats = detect_flat_spots(curve, rel_tol, pos_tol);
  }
  return curve;
}

}  // namespace rmdgraph
