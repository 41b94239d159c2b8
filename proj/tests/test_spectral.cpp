#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "oracles.hpp"
#include "rmdgraph/spectral.hpp"

using namespace rmdgraph;

TEST_CASE("laplacian of a single weighted edge") {
  const auto g = oracles::make_graph(2, {{0, 1, 2.5}});
  const Eigen::MatrixXd L = laplacian(g, false);
  Eigen::MatrixXd expect(2, 2);
  expect << 2.5, -2.5, -2.5, 2.5;
  CHECK((L - expect).norm() == 0.0);
}

TEST_CASE("unnormalized laplacian: zero row sums, constant null vector") {
  const auto g = oracles::random_graph(15, 0.3, 11);
  const Eigen::MatrixXd L = laplacian(g, false);
  CHECK((L - L.transpose()).norm() == 0.0);
  CHECK(L.rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);
  const auto [values, vectors] = detail::smallest_eigenpairs(L, 2);
  CHECK(std::abs(values(0)) < 1e-9);
  const Eigen::VectorXd v0 = vectors.col(0);
  CHECK((v0.array() - v0(0)).abs().maxCoeff() < 1e-8);
}

TEST_CASE("disconnected components produce matching zero eigenvalues") {
  // two disjoint edges: exactly two zero eigenvalues
  const auto g = oracles::make_graph(4, {{0, 1, 1.0}, {2, 3, 1.0}});
  const auto [values, vectors] = detail::smallest_eigenpairs(laplacian(g, false), 3);
  CHECK(std::abs(values(0)) < 1e-10);
  CHECK(std::abs(values(1)) < 1e-10);
  CHECK(values(2) > 0.5);
}

TEST_CASE("normalized laplacian gives isolated nodes identity rows") {
  Graph g;
  g.n = 3;
  g.edges = {{0, 1, 2.0}};
  const Eigen::MatrixXd L = laplacian(g, true);
  CHECK(L(2, 2) == 1.0);
  CHECK(L(2, 0) == 0.0);
  CHECK(L(0, 0) == Catch::Approx(1.0));
  CHECK(L(0, 1) == Catch::Approx(-1.0));  // -w / sqrt(d_u d_v)
}

TEST_CASE("eigensolver matches Eigen's full decomposition") {
  const auto g = oracles::random_graph(40, 0.2, 5);
  const Eigen::MatrixXd L = laplacian(g, false);
  const auto [values, vectors] = detail::smallest_eigenpairs(L, 4);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
  for (int c = 0; c < 4; ++c) {
    CHECK(values(c) == Catch::Approx(es.eigenvalues()(c)).margin(1e-9));
    const double residual = (L * vectors.col(c) - values(c) * vectors.col(c))
                                .cwiseAbs()
                                .maxCoeff();
    CHECK(residual < 1e-9);
    CHECK(vectors.col(c).norm() == Catch::Approx(1.0).margin(1e-10));
  }
}

TEST_CASE("two disjoint cliques split exactly with zero cut") {
  const auto g = oracles::two_cliques(5, 4);
  const auto part = spectral_cluster(g, 2, false, 1);
  CHECK(part.sizes() == std::vector<int>{5, 4});
  for (int i = 0; i < 5; ++i) CHECK(part.assignment[i] == 0);
  for (int i = 5; i < 9; ++i) CHECK(part.assignment[i] == 1);
  CHECK(cut_metrics(g, part).cut == 0.0);
}

TEST_CASE("path graph splits at the middle") {
  const auto g = oracles::path_graph(4);
  const auto part = spectral_cluster(g, 2, false, 1);
  CHECK(part.assignment == std::vector<int>{0, 0, 1, 1});
  const auto rep = cut_metrics(g, part);
  CHECK(rep.cut == 1.0);
  // brute force oracle agrees
  const auto brute = oracles::brute_force_min_ratiocut(g);
  CHECK(rep.ratio_cut == Catch::Approx(brute.ratio_cut).margin(1e-12));
}

TEST_CASE("two-way spectral equals brute force on pinned small graphs") {
  const std::vector<std::pair<std::string, Graph>> graphs = {
      {"path4", oracles::path_graph(4)},
      {"path7", oracles::path_graph(7)},
      {"cycle4", oracles::cycle_graph(4)},
      {"cycle6", oracles::cycle_graph(6)},
      {"complete5", oracles::complete_graph(5)},
      {"cliques_5_4", oracles::two_cliques(5, 4)},
      {"bridged_5_5", oracles::two_cliques(5, 5, 1)},
      {"bridged_7_4", oracles::two_cliques(7, 4, 1)},
      {"two_edges", oracles::make_graph(4, {{0, 1, 1.0}, {2, 3, 1.0}})},
  };
  for (const auto& [name, g] : graphs) {
    INFO(name);
    const auto part = spectral_cluster(g, 2, false, 3);
    const double rc = cut_metrics(g, part).ratio_cut;
    const double brute = oracles::brute_force_min_ratiocut(g).ratio_cut;
    CHECK(rc == Catch::Approx(brute).margin(1e-12));
  }
}

TEST_CASE("cut metrics on the four-cycle") {
  const auto g = oracles::cycle_graph(4);
  const auto part = Partition::create({0, 0, 1, 1}, 2);
  const auto rep = cut_metrics(g, part);
  CHECK(rep.cut == 2.0);
  CHECK(rep.ratio_cut == Catch::Approx(2.0));
  CHECK(rep.ncut == Catch::Approx(1.0));
  CHECK(rep.sizes == std::vector<int>{2, 2});
  CHECK(rep.volumes == std::vector<double>{4.0, 4.0});
}

TEST_CASE("cut metrics reject empty clusters") {
  const auto g = oracles::cycle_graph(4);
  CHECK_THROWS_WITH(cut_metrics(g, Partition::create({0, 0, 0, 0}, 2)),
                    Catch::Matchers::ContainsSubstring("empty"));
}

TEST_CASE("cut equals the laplacian quadratic form of the indicator") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g = oracles::random_graph(12, 0.35, seed);
    const Eigen::MatrixXd L = laplacian(g, false);
    Rng rng(seed + 100);
    Eigen::VectorXd ind(g.n);
    Partition part;
    part.K = 2;
    part.assignment.resize(g.n);
    bool any0 = false, any1 = false;
    for (int i = 0; i < g.n; ++i) {
      part.assignment[i] = static_cast<int>(rng.index(2));
      ind(i) = part.assignment[i];
      (part.assignment[i] ? any1 : any0) = true;
    }
    if (!any0 || !any1) continue;
    const double quad = ind.dot(L * ind);
    CHECK(cut_metrics(g, part).cut == Catch::Approx(quad).margin(1e-9));
  }
}

TEST_CASE("cut report is invariant to cluster id permutation") {
  const auto g = oracles::random_graph(14, 0.3, 2);
  Rng rng(7);
  std::vector<int> assign(g.n);
  for (int i = 0; i < g.n; ++i) assign[i] = static_cast<int>(rng.index(3));
  assign[0] = 0;
  assign[1] = 1;
  assign[2] = 2;
  const auto a = cut_metrics(g, Partition::create(assign, 3));
  for (int& c : assign) c = (c + 1) % 3;
  const auto b = cut_metrics(g, Partition::create(assign, 3));
  CHECK(a.cut == b.cut);
  CHECK(a.ratio_cut == b.ratio_cut);
  CHECK(a.ncut == b.ncut);
}

TEST_CASE("two-way ratio cut dominates 4 cut / n") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto g = oracles::random_graph(10, 0.4, seed);
    Rng rng(seed);
    std::vector<int> assign(g.n);
    assign[0] = 0;
    assign[1] = 1;
    for (int i = 2; i < g.n; ++i) assign[i] = static_cast<int>(rng.index(2));
    const auto rep = cut_metrics(g, Partition::create(assign, 2));
    CHECK(rep.ratio_cut >= 4.0 * rep.cut / g.n - 1e-12);
    const auto sizes = rep.sizes;
    if (sizes[0] == sizes[1]) {
      CHECK(rep.ratio_cut == Catch::Approx(4.0 * rep.cut / g.n));
    }
  }
}

TEST_CASE("k-means path: three far blobs recover exactly") {
  Rng rng(5);
  Eigen::MatrixXd pts(90, 2);
  std::vector<int> truth(90);
  for (int i = 0; i < 90; ++i) {
    const int c = i / 30;
    pts(i, 0) = c * 10.0 + 0.2 * rng.normal();
    pts(i, 1) = 0.2 * rng.normal();
    truth[i] = c;
  }
  const auto data = Dataset::create(pts);
  const auto g = build_knn_graph(data, 5);
  const auto part = spectral_cluster(g, 3, false, 9);
  REQUIRE(part.K == 3);
  CHECK(part.min_size() == 30);
  // clusters must coincide with the blobs up to labeling
  for (int i = 0; i < 90; ++i) {
    CHECK(part.assignment[i] == part.assignment[(i / 30) * 30]);
  }
}

TEST_CASE("hyperplane partition: sides, ties and degenerate flags") {
  Eigen::MatrixXd pts(2, 1);
  pts << -1.0, 2.0;
  const auto data = Dataset::create(pts);
  const auto part = hyperplane_partition(data, Hyperplane::axis(0, 0.0, 1), 3);
  CHECK(part.assignment == std::vector<int>{0, 1});
  CHECK_FALSE(part.degenerate());

  // a point exactly on the plane gets a seeded coin, deterministically
  Eigen::MatrixXd pts2(3, 1);
  pts2 << -1.0, 0.0, 2.0;
  const auto d2 = Dataset::create(pts2);
  const auto p1 = hyperplane_partition(d2, Hyperplane::axis(0, 0.0, 1), 3);
  const auto p2 = hyperplane_partition(d2, Hyperplane::axis(0, 0.0, 1), 3);
  CHECK(p1.assignment == p2.assignment);
  CHECK((p1.assignment[1] == 0 || p1.assignment[1] == 1));

  const auto one_sided =
      hyperplane_partition(data, Hyperplane::axis(0, 5.0, 1), 3);
  CHECK(one_sided.degenerate());
}

TEST_CASE("unbalanced mixture: valley split holds about 10% of points") {
  MixtureSpec spec;
  spec.components.push_back(
      {0.9, Eigen::Vector2d(4.5, 0.0), Eigen::Vector2d(2.0, 1.0)});
  spec.components.push_back(
      {0.1, Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(1.0, 1.0)});
  double mean_y = 0.0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    const auto data = generate_gaussian_mixture(spec, 1000, 900 + s);
    const auto part =
        hyperplane_partition(data, Hyperplane::axis(0, 1.0, 2), s);
    const auto sizes = part.sizes();
    mean_y += std::min(sizes[0], sizes[1]) / 1000.0;
  }
  mean_y /= seeds;
  CHECK(mean_y > 0.07);
  CHECK(mean_y < 0.13);
}

TEST_CASE("cut ratio statistics") {
  const auto data = oracles::two_blob_dataset(20, 3);
  const auto g = build_knn_graph(data, 4);

  // identical hyperplanes: q = 1, y = that split's imbalance
  const auto even = Hyperplane::axis(0, 5.0, 2);
  // the gap split has zero crossing edges, so pick a plane inside a blob
  const auto inside = Hyperplane::axis(0, 0.0, 2);
  const auto same = cut_ratio_stats(data, g, inside, inside, 5);
  CHECK(same.q == Catch::Approx(1.0));

  // valley plane across the empty gap: q = 0
  const auto stats = cut_ratio_stats(data, g, even, inside, 5);
  CHECK(stats.q == 0.0);
  CHECK(stats.y == Catch::Approx(0.5));

  // balanced plane with zero cut is a contract violation
  CHECK_THROWS_WITH(cut_ratio_stats(data, g, inside, even, 5),
                    Catch::Matchers::ContainsSubstring("disconnected"));
}

TEST_CASE("principal axis and boundary position") {
  const auto data = oracles::two_blob_dataset(30, 8, 10.0);
  const Eigen::VectorXd axis = principal_axis(data);
  CHECK(std::abs(axis(0)) > 0.99);
  CHECK(axis(0) > 0.0);  // orientation pinned positive

  Partition part;
  part.K = 2;
  part.assignment.assign(60, 0);
  for (int i = 30; i < 60; ++i) part.assignment[i] = 1;
  const double pos = boundary_position(data, part, axis);
  CHECK(pos > 2.0);
  CHECK(pos < 8.0);  // midway through the empty gap
}

TEST_CASE("partition csv round trip") {
  const auto part = Partition::create({0, 1, 1, 0, 2}, 3);
  const auto path =
      (std::filesystem::temp_directory_path() / "rmd_part.csv").string();
  save_partition_csv(part, path);
  const auto back = load_partition_csv(path);
  CHECK(back.assignment == part.assignment);
  CHECK(back.K == 3);
}
