#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "rmdgraph/ssl.hpp"

using namespace rmdgraph;

TEST_CASE("harmonic scores on a three-node path") {
  const auto g = oracles::path_graph(3);
  LabelSet labels;
  labels.K = 2;
  labels.pairs = {{0, 0}, {2, 1}};
  const auto prop = grf_propagate(g, labels);
  CHECK(prop.scores(1, 0) == Catch::Approx(0.5));
  CHECK(prop.scores(1, 1) == Catch::Approx(0.5));
  CHECK(prop.prediction.assignment[1] == 0);  // tie goes to the lower class
}

TEST_CASE("harmonic scores on a four-node path") {
  const auto g = oracles::path_graph(4);
  LabelSet labels;
  labels.K = 2;
  labels.pairs = {{0, 0}, {3, 1}};
  const auto prop = grf_propagate(g, labels);
  CHECK(prop.scores(1, 1) == Catch::Approx(1.0 / 3).margin(1e-10));
  CHECK(prop.scores(2, 1) == Catch::Approx(2.0 / 3).margin(1e-10));
  CHECK(prop.prediction.assignment == std::vector<int>{0, 0, 1, 1});
}

TEST_CASE("fully labeled graph returns the labels") {
  const auto g = oracles::cycle_graph(4);
  LabelSet labels;
  labels.K = 3;
  labels.pairs = {{0, 0}, {1, 1}, {2, 2}, {3, 1}};
  const auto prop = grf_propagate(g, labels);
  CHECK(prop.prediction.assignment == std::vector<int>{0, 1, 2, 1});
  for (int i = 0; i < 4; ++i) CHECK(prop.scores.row(i).sum() == 1.0);
}

TEST_CASE("harmonicity, maximum principle and row stochasticity") {
  const auto data = oracles::two_blob_dataset(40, 6, 6.0);
  const auto ranks = compute_ranks(data, StatVariant::avg_knn(5), 3, 6);
  const auto g = build_rmd_graph(data, ranks, 6, 0.5).graph;
  LabelSet labels;
  labels.K = 2;
  labels.pairs = {{0, 0}, {41, 1}, {5, 0}, {70, 1}};
  const auto prop = grf_propagate(g, labels);

  std::vector<char> labeled(g.n, 0);
  for (const auto& [idx, c] : labels.pairs) labeled[idx] = 1;
  const auto adj = g.adjacency();
  for (int i = 0; i < g.n; ++i) {
    for (int c = 0; c < 2; ++c) {
      CHECK(prop.scores(i, c) >= -1e-10);
      CHECK(prop.scores(i, c) <= 1.0 + 1e-10);
    }
    CHECK(prop.scores.row(i).sum() == Catch::Approx(1.0).margin(1e-8));
    if (labeled[i]) continue;
    double wsum = 0.0;
    Eigen::RowVector2d avg = Eigen::RowVector2d::Zero();
    for (const auto& [j, w] : adj[i]) {
      wsum += w;
      avg += w * prop.scores.row(j);
    }
    avg /= wsum;
    CHECK((prop.scores.row(i) - avg).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("unreachable unlabeled node is an error naming the node") {
  const auto g = oracles::make_graph(4, {{0, 1, 1.0}, {2, 3, 1.0}});
  LabelSet labels;
  labels.K = 2;
  labels.pairs = {{0, 0}, {1, 1}};
  CHECK_THROWS_WITH(grf_propagate(g, labels),
                    Catch::Matchers::ContainsSubstring("node 2"));
}

TEST_CASE("label set validation") {
  LabelSet labels;
  labels.K = 2;
  labels.pairs = {{0, 0}, {0, 1}};
  CHECK_THROWS(labels.validate(4));  // duplicate index
  labels.pairs = {{0, 0}, {9, 1}};
  CHECK_THROWS(labels.validate(4));  // out of range
  labels.pairs = {{0, 0}, {1, 0}};
  CHECK_THROWS(labels.validate(4));  // class 1 unrepresented
  labels.pairs = {{0, 0}, {1, 1}};
  CHECK_NOTHROW(labels.validate(4));
}

TEST_CASE("labels csv round trip") {
  LabelSet labels;
  labels.K = 3;
  labels.pairs = {{0, 0}, {4, 2}, {7, 1}};
  const auto path =
      (std::filesystem::temp_directory_path() / "rmd_labels.csv").string();
  save_labels_csv(labels, path);
  const auto back = load_labels_csv(path);
  CHECK(back.pairs == labels.pairs);
  CHECK(back.K == 3);
}
