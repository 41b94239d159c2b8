#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "rmdgraph/dataset.hpp"

using namespace rmdgraph;
namespace fs = std::filesystem;

namespace {

std::string temp_file(const std::string& name, const std::string& body) {
  const auto path = (fs::temp_directory_path() / name).string();
  std::ofstream out(path);
  out << body;
  return path;
}

MixtureSpec fig_mixture() {
  MixtureSpec spec;
  spec.components.push_back(
      {0.9, Eigen::Vector2d(4.5, 0.0), Eigen::Vector2d(2.0, 1.0)});
  spec.components.push_back(
      {0.1, Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(1.0, 1.0)});
  return spec;
}

}  // namespace

TEST_CASE("csv load: plain feature rows") {
  const auto path = temp_file("rmd_plain.csv", "0,0\n1,0\n2,0\n");
  const auto data = load_csv_dataset(path);
  CHECK(data.n() == 3);
  CHECK(data.dim() == 2);
  CHECK_FALSE(data.has_labels());
  CHECK(data.points(2, 0) == 2.0);
}

TEST_CASE("csv load: label column via header") {
  const auto path =
      temp_file("rmd_labeled.csv", "f0,f1,label\n0,0,0\n1,0,0\n2,0,1\n");
  const auto data = load_csv_dataset(path);
  REQUIRE(data.has_labels());
  CHECK(data.num_classes() == 2);
  CHECK(data.labels == std::vector<int>{0, 0, 1});
}

TEST_CASE("csv load: rejections carry the row number") {
  const auto nan_path = temp_file("rmd_nan.csv", "1,NaN\n");
  CHECK_THROWS_WITH(load_csv_dataset(nan_path),
                    Catch::Matchers::ContainsSubstring("row 1"));

  const auto ragged = temp_file("rmd_ragged.csv", "1,2\n3\n");
  CHECK_THROWS_WITH(load_csv_dataset(ragged),
                    Catch::Matchers::ContainsSubstring("row 2"));

  const auto empty = temp_file("rmd_empty.csv", "");
  CHECK_THROWS_WITH(load_csv_dataset(empty),
                    Catch::Matchers::ContainsSubstring("empty"));
}

TEST_CASE("csv round trip preserves values exactly") {
  const auto data = generate_gaussian_mixture(fig_mixture(), 60, 3);
  const auto path = (fs::temp_directory_path() / "rmd_roundtrip.csv").string();
  save_csv_dataset(data, path);
  const auto back = load_csv_dataset(path);
  REQUIRE(back.n() == data.n());
  REQUIRE(back.has_labels());
  CHECK(back.points == data.points);
  CHECK(back.labels == data.labels);
}

TEST_CASE("mixture generator: component proportions and determinism") {
  const auto spec = fig_mixture();
  const auto a = generate_gaussian_mixture(spec, 1000, 11);
  const auto b = generate_gaussian_mixture(spec, 1000, 11);
  CHECK(a.points == b.points);
  CHECK(a.labels == b.labels);

  long small = 0;
  for (int c : a.labels) {
    if (c == 1) ++small;
  }
  // 10% component, n = 1000: allow +-4 sd of binomial noise.
  CHECK(small > 100 - 38);
  CHECK(small < 100 + 38);
}

TEST_CASE("mixture generator: mean of a single standard component") {
  MixtureSpec spec;
  spec.components.push_back(
      {1.0, Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(1.0, 1.0)});
  const auto data = generate_gaussian_mixture(spec, 10000, 5);
  const Eigen::RowVectorXd mean = data.points.colwise().mean();
  CHECK(std::abs(mean(0)) < 0.05);
  CHECK(std::abs(mean(1)) < 0.05);
}

TEST_CASE("mixture generator: multinomial counts over seeds") {
  const auto spec = fig_mixture();
  double mean_small = 0.0;
  for (int s = 0; s < 50; ++s) {
    const auto data = generate_gaussian_mixture(spec, 1000, 1000 + s);
    for (int c : data.labels) {
      if (c == 1) mean_small += 1.0;
    }
  }
  mean_small /= 50.0;
  // Mean of the 10% component count over 50 seeds: 3 sd of the seed mean.
  const double sd = std::sqrt(1000 * 0.1 * 0.9 / 50.0);
  CHECK(std::abs(mean_small - 100.0) <= 3.0 * sd);
}

TEST_CASE("three-component proximal mixture is labeled with 3 classes") {
  MixtureSpec spec;
  spec.components.push_back(
      {2.0 / 11, Eigen::Vector2d(-0.7, 0.0), Eigen::Vector2d(1.0, 1.0)});
  spec.components.push_back(
      {8.0 / 11, Eigen::Vector2d(4.5, 0.0), Eigen::Vector2d(2.0, 1.0)});
  spec.components.push_back(
      {1.0 / 11, Eigen::Vector2d(9.7, 0.0), Eigen::Vector2d(0.7, 0.7)});
  const auto data = generate_gaussian_mixture(spec, 1100, 2);
  CHECK(data.n() == 1100);
  CHECK(data.num_classes() == 3);
}

TEST_CASE("two moons: exact class counts and determinism") {
  const auto a = generate_two_moons_gaussian(1000, {0.45, 0.45, 0.10}, 0.1, 4);
  std::vector<long> counts(3, 0);
  for (int c : a.labels) ++counts[c];
  CHECK(counts == std::vector<long>{450, 450, 100});

  const auto b = generate_two_moons_gaussian(1000, {0.45, 0.45, 0.10}, 0.1, 4);
  CHECK(a.points == b.points);

  const auto pure = generate_two_moons_gaussian(20, {0.5, 0.5, 0.0}, 0.05, 4);
  CHECK(pure.num_classes() == 2);
  CHECK(pure.n() == 20);
}

TEST_CASE("two moons: pinned geometry") {
  // Noise-free draws land exactly on the arcs / the blob center.
  const auto data = generate_two_moons_gaussian(300, {0.4, 0.4, 0.2}, 0.0, 9);
  for (long i = 0; i < data.n(); ++i) {
    const double x = data.points(i, 0), y = data.points(i, 1);
    switch (data.labels[i]) {
      case 0:
        CHECK(std::abs(x * x + y * y - 1.0) < 1e-9);
        CHECK(y >= -1e-12);
        break;
      case 1: {
        const double dx = x - TwoMoonsGeometry::moon2_center_x;
        const double dy = y - TwoMoonsGeometry::moon2_center_y;
        CHECK(std::abs(dx * dx + dy * dy - 1.0) < 1e-9);
        CHECK(dy <= 1e-12);
        break;
      }
      default:
        CHECK(x == TwoMoonsGeometry::blob_center_x);
        CHECK(y == TwoMoonsGeometry::blob_center_y);
    }
  }
}

TEST_CASE("dataset invariants are enforced") {
  Eigen::MatrixXd one(1, 2);
  one << 0, 0;
  CHECK_THROWS(Dataset::create(one));

  Eigen::MatrixXd pts(2, 1);
  pts << 0, 1;
  CHECK_THROWS(Dataset::create(pts, {0, 2}));  // class 1 missing
  CHECK_NOTHROW(Dataset::create(pts, {1, 0}));

  Eigen::MatrixXd bad(2, 1);
  bad << 0, std::numeric_limits<double>::infinity();
  CHECK_THROWS(Dataset::create(bad));
}

TEST_CASE("mixture spec validation") {
  MixtureSpec spec;
  spec.components.push_back(
      {0.5, Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1)});
  CHECK_THROWS(spec.validate());  // weights sum to 0.5
  spec.components.push_back(
      {0.5, Eigen::Vector2d(1, 1), Eigen::Vector2d(1, 0)});
  CHECK_THROWS(spec.validate());  // zero variance
  spec.components[1].var = Eigen::Vector2d(1, 1);
  CHECK_NOTHROW(spec.validate());

  const auto j = spec.to_json();
  const auto back = MixtureSpec::from_json(j);
  CHECK(back.components.size() == 2);
  CHECK(back.components[1].mean(0) == 1.0);
}
