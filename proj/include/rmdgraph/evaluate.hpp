#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "rmdgraph/dataset.hpp"
#include "rmdgraph/rng.hpp"
#include "rmdgraph/spectral.hpp"

namespace rmdgraph {

struct EvalReport {
  double error_rate = 0.0;
  std::vector<std::vector<long>> confusion;  // [true class][predicted cluster]
  std::vector<int> permutation;              // best cluster -> class mapping

  struct Trial {
    std::uint64_t seed = 0;
    double error = 0.0;
    bool ok = false;
    std::string message;
  };
  std::vector<Trial> trials;
  double mean_error = 0.0;
  double std_error = 0.0;
};

/// Clustering error under the best one-to-one cluster/class matching,
/// found exhaustively over the K! permutations (K <= 6). Invariant under
/// relabeling of either side.
inline EvalReport clustering_error(const Partition& pred,
                                   const std::vector<int>& truth) {
  const long n = pred.n();
  if (static_cast<long>(truth.size()) != n) {
    throw std::invalid_argument("prediction and truth lengths differ");
  }
  int k_true = 0;
  for (int c : truth) {
    if (c < 0) throw std::invalid_argument("negative class id in truth");
    k_true = std::max(k_true, c + 1);
  }
  const int K = std::max(k_true, pred.K);
  if (K > 6) {
    throw std::invalid_argument("matching supports at most 6 classes");
  }

  EvalReport rep;
  rep.confusion.assign(k_true, std::vector<long>(pred.K, 0));
  for (long i = 0; i < n; ++i) {
    ++rep.confusion[truth[i]][pred.assignment[i]];
  }

  std::vector<int> perm(K);
  std::iota(perm.begin(), perm.end(), 0);
  long best = -1;
  std::vector<int> best_perm = perm;
  do {
    long matched = 0;
    for (int c = 0; c < pred.K; ++c) {
      const int cls = perm[c];
      if (cls < k_true) matched += rep.confusion[cls][c];
    }
    if (matched > best) {
      best = matched;
      best_perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  rep.permutation.assign(best_perm.begin(), best_perm.begin() + pred.K);
  rep.error_rate = 1.0 - static_cast<double>(best) / static_cast<double>(n);
  rep.mean_error = rep.error_rate;
  rep.std_error = 0.0;
  return rep;
}

/// Seeded unbalanced subsample: draws counts[c] points of each class (a
/// zero count drops the class). Surviving classes are relabeled compactly
/// in their original order; rows keep their original relative order.
inline Dataset subsample_by_class(const Dataset& data,
                                  const std::vector<long>& counts,
                                  std::uint64_t seed) {
  if (!data.has_labels()) {
    throw std::invalid_argument("subsample needs a labeled dataset");
  }
  const int K = data.num_classes();
  if (static_cast<int>(counts.size()) != K) {
    throw std::invalid_argument("need one count per class");
  }
  std::vector<std::vector<long>> by_class(K);
  for (long i = 0; i < data.n(); ++i) by_class[data.labels[i]].push_back(i);

  Rng rng(derive_seed(seed, "subsample"));
  std::vector<long> keep;
  for (int c = 0; c < K; ++c) {
    if (counts[c] < 0 ||
        counts[c] > static_cast<long>(by_class[c].size())) {
      throw std::invalid_argument("class " + std::to_string(c) + " has only " +
                                  std::to_string(by_class[c].size()) +
                                  " samples");
    }
    auto idx = by_class[c];
    rng.shuffle(idx);
    idx.resize(counts[c]);
    keep.insert(keep.end(), idx.begin(), idx.end());
  }
  std::sort(keep.begin(), keep.end());

  std::vector<int> remap(K, -1);
  int next = 0;
  for (int c = 0; c < K; ++c) {
    if (counts[c] > 0) remap[c] = next++;
  }
  Eigen::MatrixXd pts(keep.size(), data.dim());
  std::vector<int> labels(keep.size());
  for (std::size_t r = 0; r < keep.size(); ++r) {
    pts.row(r) = data.points.row(keep[r]);
    labels[r] = remap[data.labels[keep[r]]];
  }
  return Dataset::create(std::move(pts), std::move(labels), data.name);
}

/// Runs T independent seeded trials and aggregates their error rates.
/// trial_fn(seed) returns one error rate or throws; failures are recorded
/// per trial and only an all-failed run is fatal. Statistics use the
/// population convention (std = 0 for T = 1) and a fixed summation order,
/// so reports are reproducible bit for bit.
inline EvalReport run_trials(int T, std::uint64_t base_seed,
                             const std::function<double(std::uint64_t)>& trial_fn) {
  if (T < 1) throw std::invalid_argument("need T >= 1");
  EvalReport rep;
  rep.trials.resize(T);
  for (int t = 0; t < T; ++t) {
    auto& trial = rep.trials[t];
    trial.seed = derive_seed(base_seed, "trial", static_cast<std::uint64_t>(t));
    try {
      trial.error = trial_fn(trial.seed);
      trial.ok = true;
    } catch (const std::exception& e) {
      trial.ok = false;
      trial.message = e.what();
    }
  }
  long ok = 0;
  double sum = 0.0;
  for (const auto& t : rep.trials) {
    if (t.ok) {
      ++ok;
      sum += t.error;
    }
  }
  if (ok == 0) throw std::runtime_error("all trials failed");
  rep.mean_error = sum / static_cast<double>(ok);
  double var = 0.0;
  for (const auto& t : rep.trials) {
    if (t.ok) {
      const double d = t.error - rep.mean_error;
      var += d * d;
    }
  }
  rep.std_error = std::sqrt(var / static_cast<double>(ok));
  rep.error_rate = rep.mean_error;
  return rep;
}

}  // namespace rmdgraph
