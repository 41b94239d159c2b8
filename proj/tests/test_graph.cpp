#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <set>

#include "oracles.hpp"
#include "rmdgraph/graph.hpp"

using namespace rmdgraph;

namespace {

Dataset line_dataset(std::initializer_list<double> xs) {
  Eigen::MatrixXd m(static_cast<long>(xs.size()), 1);
  long i = 0;
  for (double v : xs) m(i++, 0) = v;
  return Dataset::create(std::move(m));
}

std::set<std::pair<int, int>> edge_set(const Graph& g) {
  std::set<std::pair<int, int>> s;
  for (const auto& e : g.edges) s.emplace(e.u, e.v);
  return s;
}

}  // namespace

TEST_CASE("rbf weight values") {
  CHECK(rbf_weight(0.0, 3.0) == 1.0);
  CHECK(rbf_weight(2.0, 2.0) == Catch::Approx(std::exp(-0.5)).epsilon(1e-12));
  CHECK(rbf_weight(4.0, 2.0) == Catch::Approx(std::exp(-2.0)).epsilon(1e-12));
  CHECK_THROWS(rbf_weight(1.0, 0.0));
  CHECK_THROWS(rbf_weight(1.0, -2.0));
}

TEST_CASE("knn graph on a line: union keeps one-sided picks") {
  const auto data = line_dataset({0.0, 1.0, 3.0});
  const auto g = build_knn_graph(data, 1);
  CHECK(edge_set(g) == std::set<std::pair<int, int>>{{0, 1}, {1, 2}});
  for (const auto& e : g.edges) CHECK(e.weight == 1.0);
}

TEST_CASE("knn graph with k = n-1 is complete") {
  const auto data = oracles::random_dataset(12, 2, 3);
  const auto g = build_knn_graph(data, 11);
  CHECK(g.edges.size() == 12 * 11 / 2);
}

TEST_CASE("knn graph tolerates coincident points") {
  Eigen::MatrixXd pts(3, 2);
  pts << 0, 0, 0, 0, 1, 0;
  const auto g = build_knn_graph(Dataset::create(pts), 1);
  // node 2 ties between the duplicates; index order picks node 0
  CHECK(edge_set(g) == std::set<std::pair<int, int>>{{0, 1}, {0, 2}});
  CHECK_NOTHROW(g.validate());
}

TEST_CASE("modulated degree formula") {
  CHECK(modulated_degree(30, 0.4, 0.0, 1000) == 12);
  CHECK(modulated_degree(30, 0.4, 1.0, 1000) == 48);
  CHECK(modulated_degree(30, 0.4, 0.5, 1000) == 30);
  CHECK(modulated_degree(5, 0.5, 0.25, 1000) == 4);  // 3.75 rounds half-up
  CHECK(modulated_degree(1, 0.0, 0.001, 1000) == 1); // clamped to >= 1
  CHECK(modulated_degree(30, 0.0, 1.0, 50) == 49);   // clamped to n-1
}

TEST_CASE("rmd graph with lambda = 1 equals the knn graph") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const auto data = oracles::random_dataset(80, 2, seed);
    const auto ranks = compute_ranks(data, StatVariant::avg_knn(5), 3, seed);
    const auto rmd = build_rmd_graph(data, ranks, 7, 1.0);
    const auto knn = build_knn_graph(data, 7);
    CHECK(edge_set(rmd.graph) == edge_set(knn));
    CHECK(rmd.graph.edges.size() == knn.edges.size());
  }
}

TEST_CASE("rmd degree profile: monotone in rank, bounded, mean near k") {
  const auto data = oracles::random_dataset(400, 2, 17);
  const auto ranks = compute_ranks(data, StatVariant::avg_knn(10), 5, 17);
  const int k = 10;
  const double lambda = 0.4;
  const auto rmd = build_rmd_graph(data, ranks, k, lambda);
  const auto& deg = rmd.profile.degrees;

  for (long a = 0; a < data.n(); ++a) {
    CHECK(deg[a] >= static_cast<int>(std::floor(k * lambda + 0.5)) - 0);
    CHECK(deg[a] <= static_cast<int>(std::floor(k * (2 - lambda) + 0.5)));
    for (long b = 0; b < data.n(); ++b) {
      if (ranks.ranks[a] > ranks.ranks[b]) CHECK(deg[a] >= deg[b]);
    }
  }
  double mean = 0.0;
  for (int d : deg) mean += d;
  mean /= deg.size();
  CHECK(mean > k - 1);
  CHECK(mean < k + 1);
}

TEST_CASE("rmd rejects bad arguments") {
  const auto data = oracles::random_dataset(40, 2, 4);
  const auto ranks = compute_ranks(data, StatVariant::avg_knn(3), 1, 4);
  CHECK_THROWS(build_rmd_graph(data, ranks, 30, 0.4));  // k > (n-1)/2
  CHECK_THROWS(build_rmd_graph(data, ranks, 5, 1.5));
  RankVector short_ranks = ranks;
  short_ranks.ranks.pop_back();
  CHECK_THROWS(build_rmd_graph(data, short_ranks, 5, 0.4));
}

TEST_CASE("epsilon graph thresholds pairwise distances") {
  const auto data = line_dataset({0.0, 1.0, 3.0});
  CHECK(edge_set(build_epsilon_graph(data, 1.5)) ==
        std::set<std::pair<int, int>>{{0, 1}});
  CHECK(build_epsilon_graph(data, 3.0).edges.size() == 3);   // >= diameter
  CHECK(build_epsilon_graph(data, 0.5).edges.empty());       // < min distance
}

TEST_CASE("full rbf graph is complete with weights in (0, 1]") {
  Eigen::MatrixXd pts(3, 2);
  pts << 0, 0, 0, 0, 3, 4;
  const auto g = build_full_rbf_graph(Dataset::create(pts), 2.0);
  REQUIRE(g.edges.size() == 3);
  for (const auto& e : g.edges) {
    CHECK(e.weight > 0.0);
    CHECK(e.weight <= 1.0);
  }
  CHECK(g.edges[0].weight == 1.0);  // coincident pair

  const auto tighter = build_full_rbf_graph(Dataset::create(pts), 20.0);
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    CHECK(tighter.edges[i].weight >= g.edges[i].weight);
  }
}

TEST_CASE("mean knn distance") {
  CHECK(mean_knn_distance(line_dataset({0.0, 1.0, 3.0}), 1) ==
        Catch::Approx(4.0 / 3.0));

  Eigen::MatrixXd dup(2, 1);
  dup << 5.0, 5.0;
  CHECK(mean_knn_distance(Dataset::create(dup), 1) == 0.0);

  const double h = 0.25;
  Eigen::MatrixXd grid(100, 1);
  for (int i = 0; i < 100; ++i) grid(i, 0) = i * h;
  CHECK(mean_knn_distance(Dataset::create(grid), 1) == Catch::Approx(h));
}

TEST_CASE("graph csv round trip with metadata sidecar") {
  const auto data = oracles::random_dataset(25, 2, 9);
  const auto g = build_knn_graph(data, 3, EdgeWeight::rbf(0.8));
  const auto path =
      (std::filesystem::temp_directory_path() / "rmd_graph.csv").string();
  save_graph_csv(g, path);
  const auto back = load_graph_csv(path);
  REQUIRE(back.n == g.n);
  REQUIRE(back.edges.size() == g.edges.size());
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    CHECK(back.edges[i].u == g.edges[i].u);
    CHECK(back.edges[i].v == g.edges[i].v);
    CHECK(back.edges[i].weight == g.edges[i].weight);
  }
  CHECK(back.meta.at("builder") == "knn");
  CHECK(back.meta.at("sigma").get<double>() == 0.8);
}

TEST_CASE("graph validation rejects malformed edge lists") {
  Graph g;
  g.n = 3;
  g.edges = {{0, 0, 1.0}};
  CHECK_THROWS(g.validate());  // self loop
  g.edges = {{0, 1, -1.0}};
  CHECK_THROWS(g.validate());  // non-positive weight
  g.edges = {{0, 1, 1.0}, {0, 1, 1.0}};
  CHECK_THROWS(g.validate());  // duplicate
  g.edges = {{1, 2, 1.0}, {0, 1, 1.0}};
  CHECK_THROWS(g.validate());  // unsorted
}
