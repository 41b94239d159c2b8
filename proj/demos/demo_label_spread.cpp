// Label propagation on the two-moons-plus-blob sample: a handful of seed
// labels harmonically extended over the rank-modulated graph.

#include <cstdio>

#include "rmdgraph/rmdgraph.hpp"

int main() {
  using namespace rmdgraph;

  const auto data =
      generate_two_moons_gaussian(600, {0.45, 0.45, 0.10}, 0.1, 11);
  const auto ranks = compute_ranks(data, StatVariant::avg_knn(20), 5, 11);
  const auto graph = build_rmd_graph(data, ranks, 20, 0.5).graph;

  // One seed label per class, first index of each.
  LabelSet labels;
  labels.K = data.num_classes();
  std::vector<bool> seen(labels.K, false);
  for (long i = 0; i < data.n(); ++i) {
    const int c = data.labels[i];
    if (!seen[c]) {
      seen[c] = true;
      labels.pairs.emplace_back(static_cast<int>(i), c);
    }
  }

  const auto prop = grf_propagate(graph, labels);
  long wrong = 0;
  for (long i = 0; i < data.n(); ++i) {
    if (prop.prediction.assignment[i] != data.labels[i]) ++wrong;
  }
  std::printf("propagated %d seed labels to %ld nodes, %ld mistakes (%.2f%%)\n",
              static_cast<int>(labels.pairs.size()), data.n(), wrong,
              100.0 * wrong / data.n());
}
