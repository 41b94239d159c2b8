#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <deque>
#include <stdexcept>
#include <string>
#include <vector>

#include "rmdgraph/graph.hpp"
#include "rmdgraph/spectral.hpp"

namespace rmdgraph {

/// Seed labels for propagation: distinct node indices with class ids in
/// {0..K-1}, at least one per class.
struct LabelSet {
  std::vector<std::pair<int, int>> pairs;  // (node index, class id)
  int K = 0;

  void validate(int n) const {
    if (K < 1) throw std::invalid_argument("need K >= 1 classes");
    std::vector<bool> used(n, false), seen(K, false);
    for (const auto& [idx, c] : pairs) {
      if (idx < 0 || idx >= n) throw std::invalid_argument("label index out of range");
      if (c < 0 || c >= K) throw std::invalid_argument("class id out of range");
      if (used[idx]) throw std::invalid_argument("duplicate label index");
      used[idx] = true;
      seen[c] = true;
    }
    for (int c = 0; c < K; ++c) {
      if (!seen[c]) {
        throw std::invalid_argument("class " + std::to_string(c) +
                                    " has no labeled sample");
      }
    }
  }
};

struct Propagation {
  Eigen::MatrixXd scores;  // n x K, rows of labeled nodes are one-hot
  Partition prediction;    // per-node argmax, ties to the lowest class id
};

/// Harmonic label propagation: labeled nodes are clamped to one-hot rows
/// and every unlabeled node's score is the weighted average of its
/// neighbors', i.e. the minimizer of the Laplacian quadratic form under the
/// label constraints. Solved directly on the unlabeled block, which is
/// positive definite whenever each unlabeled node reaches a labeled one.
inline Propagation grf_propagate(const Graph& g, const LabelSet& labels) {
  labels.validate(g.n);
  const int n = g.n;
  const int K = labels.K;

  std::vector<int> label_of(n, -1);
  for (const auto& [idx, c] : labels.pairs) label_of[idx] = c;

  // Every unlabeled node must be connected to some labeled node.
  const auto adj = g.adjacency();
  std::vector<char> reached(n, 0);
  std::deque<int> frontier;
  for (const auto& [idx, c] : labels.pairs) {
    reached[idx] = 1;
    frontier.push_back(idx);
  }
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop_front();
    for (const auto& [v, w] : adj[u]) {
      if (!reached[v]) {
        reached[v] = 1;
        frontier.push_back(v);
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    if (!reached[i]) {
      throw std::runtime_error("node " + std::to_string(i) +
                               " has no path to any labeled node");
    }
  }

  std::vector<int> unlabeled;
  std::vector<int> slot(n, -1);
  for (int i = 0; i < n; ++i) {
    if (label_of[i] < 0) {
      slot[i] = static_cast<int>(unlabeled.size());
      unlabeled.push_back(i);
    }
  }

  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(n, K);
  for (const auto& [idx, c] : labels.pairs) scores(idx, c) = 1.0;

  const int nu = static_cast<int>(unlabeled.size());
  if (nu > 0) {
    Eigen::MatrixXd Luu = Eigen::MatrixXd::Zero(nu, nu);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nu, K);
    for (int a = 0; a < nu; ++a) {
      const int i = unlabeled[a];
      double deg = 0.0;
      for (const auto& [j, w] : adj[i]) {
        deg += w;
        if (label_of[j] >= 0) {
          rhs(a, label_of[j]) += w;
        } else {
          Luu(a, slot[j]) -= w;
        }
      }
      Luu(a, a) += deg;
    }
    const Eigen::MatrixXd F = Eigen::LDLT<Eigen::MatrixXd>(Luu).solve(rhs);
    for (int a = 0; a < nu; ++a) scores.row(unlabeled[a]) = F.row(a);
  }

  std::vector<int> pred(n);
  for (int i = 0; i < n; ++i) {
    int best = 0;
    for (int c = 1; c < K; ++c) {
      if (scores(i, c) > scores(i, best)) best = c;
    }
    pred[i] = best;
  }
  return {std::move(scores), Partition::create(std::move(pred), K)};
}

/// labels.csv: "index,class".
inline void save_labels_csv(const LabelSet& labels, const std::string& path) {
  std::string body = "index,class\n";
  for (const auto& [idx, c] : labels.pairs) {
    body += std::to_string(idx) + ',' + std::to_string(c) + '\n';
  }
  detail::write_file(path, body);
}

inline LabelSet load_labels_csv(const std::string& path) {
  const auto lines = detail::read_lines(path);
  LabelSet ls;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto t = detail::trim(lines[i]);
    if (t.empty() || (i == 0 && t.substr(0, 5) == "index")) continue;
    const auto fields = detail::split(std::string(t), ',');
    long idx, c;
    if (fields.size() != 2 || !detail::parse_int(fields[0], idx) ||
        !detail::parse_int(fields[1], c) || c < 0) {
      throw std::runtime_error(path + ": row " + std::to_string(i + 1) +
                               ": expected index,class");
    }
    ls.pairs.emplace_back(static_cast<int>(idx), static_cast<int>(c));
    ls.K = std::max<int>(ls.K, static_cast<int>(c) + 1);
  }
  if (ls.pairs.empty()) throw std::runtime_error(path + ": no label rows");
  return ls;
}

}  // namespace rmdgraph
