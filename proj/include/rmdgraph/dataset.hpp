#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rmdgraph/detail/text.hpp"
#include "rmdgraph/rng.hpp"

namespace rmdgraph {

/// Point cloud with optional integer class labels. Immutable by convention:
/// construct through create() (which validates) and treat as read-only.
struct Dataset {
  Eigen::MatrixXd points;   // n x d
  std::vector<int> labels;  // empty when unlabeled, else one id per row
  std::string name;

  long n() const { return points.rows(); }
  long dim() const { return points.cols(); }
  bool has_labels() const { return !labels.empty(); }

  /// Number of label classes (0 when unlabeled).
  int num_classes() const {
    int k = 0;
    for (int c : labels) k = std::max(k, c + 1);
    return k;
  }

  static Dataset create(Eigen::MatrixXd pts, std::vector<int> labels = {},
                        std::string name = "") {
    if (pts.rows() < 2 || pts.cols() < 1) {
      throw std::invalid_argument("dataset needs n >= 2 points and d >= 1");
    }
    if (!pts.allFinite()) {
      throw std::invalid_argument("dataset contains non-finite coordinates");
    }
    if (!labels.empty()) {
      if (static_cast<long>(labels.size()) != pts.rows()) {
        throw std::invalid_argument("label count does not match point count");
      }
      int k = 0;
      for (int c : labels) {
        if (c < 0) throw std::invalid_argument("negative class id");
        k = std::max(k, c + 1);
      }
      std::vector<bool> seen(k, false);
      for (int c : labels) seen[c] = true;
      for (int c = 0; c < k; ++c) {
        if (!seen[c]) {
          throw std::invalid_argument("class id " + std::to_string(c) +
                                      " has no samples");
        }
      }
    }
    return Dataset{std::move(pts), std::move(labels), std::move(name)};
  }
};

struct GaussianComponent {
  double weight = 0.0;
  Eigen::VectorXd mean;
  Eigen::VectorXd var;  // diagonal of the covariance
};

/// Mixture of axis-aligned Gaussians.
struct MixtureSpec {
  std::vector<GaussianComponent> components;

  int dim() const {
    return components.empty() ? 0 : static_cast<int>(components[0].mean.size());
  }

  void validate() const {
    if (components.empty()) throw std::invalid_argument("empty mixture");
    const long d = components[0].mean.size();
    double total = 0.0;
    for (const auto& c : components) {
      if (c.weight < 0.0) throw std::invalid_argument("negative weight");
      if (c.mean.size() != d || c.var.size() != d) {
        throw std::invalid_argument("mixture components disagree on dimension");
      }
      for (long j = 0; j < d; ++j) {
        if (!(c.var(j) > 0.0)) {
          throw std::invalid_argument("covariance diagonal must be positive");
        }
      }
      total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) {
      throw std::invalid_argument("mixture weights must sum to 1");
    }
  }

  static MixtureSpec from_json(const nlohmann::json& j) {
    MixtureSpec spec;
    if (!j.contains("components") || !j["components"].is_array()) {
      throw std::invalid_argument("mixture json needs a \"components\" array");
    }
    for (const auto& cj : j["components"]) {
      GaussianComponent c;
      c.weight = cj.at("weight").get<double>();
      const auto mean = cj.at("mean").get<std::vector<double>>();
      const auto var = cj.at("var").get<std::vector<double>>();
      c.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), mean.size());
      c.var = Eigen::Map<const Eigen::VectorXd>(var.data(), var.size());
      spec.components.push_back(std::move(c));
    }
    spec.validate();
    return spec;
  }

  nlohmann::json to_json() const {
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& c : components) {
      comps.push_back({{"weight", c.weight},
                       {"mean", std::vector<double>(c.mean.begin(), c.mean.end())},
                       {"var", std::vector<double>(c.var.begin(), c.var.end())}});
    }
    return {{"components", comps}};
  }
};

/// n i.i.d. draws from the mixture; the emitted label is the component
/// index. Bit-identical output for identical (spec, n, seed).
inline Dataset generate_gaussian_mixture(const MixtureSpec& spec, long n,
                                         std::uint64_t seed) {
  spec.validate();
  if (n < 2) throw std::invalid_argument("need n >= 2");
  const long d = spec.dim();
  Eigen::MatrixXd pts(n, d);
  std::vector<int> labels(n);
  Rng rng(derive_seed(seed, "gaussian-mixture"));
  for (long i = 0; i < n; ++i) {
    const double u = rng.uniform01();
    double cum = 0.0;
    int comp = static_cast<int>(spec.components.size()) - 1;
    for (std::size_t c = 0; c < spec.components.size(); ++c) {
      cum += spec.components[c].weight;
      if (u < cum) {
        comp = static_cast<int>(c);
        break;
      }
    }
    const auto& g = spec.components[comp];
    for (long j = 0; j < d; ++j) {
      pts(i, j) = g.mean(j) + std::sqrt(g.var(j)) * rng.normal();
    }
    labels[i] = comp;
  }
  // Labels are component indices. A tiny sample may miss a component
  // entirely; compact ids in component order so the label invariant
  // (every class in range occurs) still holds.
  const int k = static_cast<int>(spec.components.size());
  std::vector<bool> present(k, false);
  for (long i = 0; i < n; ++i) present[labels[i]] = true;
  std::vector<int> remap(k, -1);
  int next_id = 0;
  for (int c = 0; c < k; ++c) {
    if (present[c]) remap[c] = next_id++;
  }
  for (long i = 0; i < n; ++i) labels[i] = remap[labels[i]];
  return Dataset::create(std::move(pts), std::move(labels), "gaussian-mixture");
}

/// Fixed geometry of the two-moons-plus-blob generator. Tests pin these
/// constants; change them and the regression values move.
struct TwoMoonsGeometry {
  static constexpr double radius = 1.0;
  static constexpr double moon2_center_x = 1.0;
  static constexpr double moon2_center_y = 0.5;
  static constexpr double blob_center_x = 3.0;  // moons' midpoint + 2.5
  static constexpr double blob_center_y = 0.25;
  static constexpr double blob_noise_factor = 2.0;
};

/// Two interleaved unit half-circles plus a Gaussian blob to their right.
/// Class sizes follow `fractions` by largest-remainder apportionment;
/// labels are {0,1,2} (or {0,1} when the blob fraction is zero).
inline Dataset generate_two_moons_gaussian(long n,
                                           std::array<double, 3> fractions,
                                           double noise, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("need n >= 2");
  double total = 0.0;
  for (double f : fractions) {
    if (f < 0.0) throw std::invalid_argument("fractions must be >= 0");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("fractions must sum to 1");
  }
  if (!(fractions[0] > 0.0) || !(fractions[1] > 0.0)) {
    throw std::invalid_argument("both moon fractions must be positive");
  }
  if (noise < 0.0) throw std::invalid_argument("noise must be >= 0");

  // Largest-remainder apportionment of n over the three classes.
  std::array<long, 3> count;
  std::array<double, 3> frac_part;
  long assigned = 0;
  for (int c = 0; c < 3; ++c) {
    const double exact = fractions[c] * static_cast<double>(n);
    count[c] = static_cast<long>(std::floor(exact));
    frac_part[c] = exact - std::floor(exact);
    assigned += count[c];
  }
  while (assigned < n) {
    int best = 0;
    for (int c = 1; c < 3; ++c) {
      if (frac_part[c] > frac_part[best]) best = c;
    }
    ++count[best];
    frac_part[best] = -1.0;
    ++assigned;
  }

  using Geo = TwoMoonsGeometry;
  Eigen::MatrixXd pts(n, 2);
  std::vector<int> labels(n);
  Rng rng(derive_seed(seed, "two-moons"));
  long row = 0;
  for (long i = 0; i < count[0]; ++i, ++row) {
    const double t = rng.uniform(0.0, std::numbers::pi);
    pts(row, 0) = Geo::radius * std::cos(t) + noise * rng.normal();
    pts(row, 1) = Geo::radius * std::sin(t) + noise * rng.normal();
    labels[row] = 0;
  }
  for (long i = 0; i < count[1]; ++i, ++row) {
    const double t = rng.uniform(0.0, std::numbers::pi);
    pts(row, 0) =
        Geo::moon2_center_x - Geo::radius * std::cos(t) + noise * rng.normal();
    pts(row, 1) =
        Geo::moon2_center_y - Geo::radius * std::sin(t) + noise * rng.normal();
    labels[row] = 1;
  }
  for (long i = 0; i < count[2]; ++i, ++row) {
    const double s = Geo::blob_noise_factor * noise;
    pts(row, 0) = Geo::blob_center_x + s * rng.normal();
    pts(row, 1) = Geo::blob_center_y + s * rng.normal();
    labels[row] = 2;
  }
  return Dataset::create(std::move(pts), std::move(labels), "two-moons");
}

/// CSV ingestion. Header is optional; a label column exists iff a header is
/// present and its last field is exactly "label". Rejections carry 1-based
/// file line numbers.
inline Dataset load_csv_dataset(const std::string& path) {
  const auto raw = detail::read_lines(path);
  std::vector<std::pair<long, std::string>> rows;  // (line number, text)
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!detail::trim(raw[i]).empty()) {
      rows.emplace_back(static_cast<long>(i) + 1, raw[i]);
    }
  }
  if (rows.empty()) throw std::runtime_error(path + ": empty file");

  auto fields_of = [](const std::string& line) {
    return detail::split(std::string(detail::trim(line)), ',');
  };

  const auto first = fields_of(rows[0].second);
  bool has_header = false;
  for (const auto& f : first) {
    double unused;
    if (!detail::parse_double(f, unused)) {
      has_header = true;
      break;
    }
  }
  const bool has_label =
      has_header && !first.empty() &&
      detail::trim(first.back()) == "label";
  const std::size_t cols = first.size();
  const std::size_t feat_cols = has_label ? cols - 1 : cols;
  if (feat_cols == 0) throw std::runtime_error(path + ": no feature columns");

  const std::size_t data_begin = has_header ? 1 : 0;
  const std::size_t n = rows.size() - data_begin;
  if (n == 0) throw std::runtime_error(path + ": no data rows");

  Eigen::MatrixXd pts(n, feat_cols);
  std::vector<int> labels;
  if (has_label) labels.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto& [line_no, text] = rows[data_begin + r];
    const auto fields = fields_of(text);
    if (fields.size() != cols) {
      throw std::runtime_error(path + ": row " + std::to_string(line_no) +
                               ": expected " + std::to_string(cols) +
                               " columns, got " + std::to_string(fields.size()));
    }
    for (std::size_t j = 0; j < feat_cols; ++j) {
      double v;
      if (!detail::parse_double(fields[j], v)) {
        throw std::runtime_error(path + ": row " + std::to_string(line_no) +
                                 ": malformed value '" + fields[j] + "'");
      }
      if (!std::isfinite(v)) {
        throw std::runtime_error(path + ": row " + std::to_string(line_no) +
                                 ": non-finite value");
      }
      pts(r, j) = v;
    }
    if (has_label) {
      long c;
      if (!detail::parse_int(fields.back(), c) || c < 0) {
        throw std::runtime_error(path + ": row " + std::to_string(line_no) +
                                 ": malformed label '" + fields.back() + "'");
      }
      labels[r] = static_cast<int>(c);
    }
  }
  return Dataset::create(std::move(pts), std::move(labels), path);
}

inline void save_csv_dataset(const Dataset& data, const std::string& path) {
  std::string body;
  for (long j = 0; j < data.dim(); ++j) {
    body += (j ? ",f" : "f") + std::to_string(j);
  }
  if (data.has_labels()) body += ",label";
  body += '\n';
  for (long i = 0; i < data.n(); ++i) {
    for (long j = 0; j < data.dim(); ++j) {
      if (j) body += ',';
      body += detail::fmt_double(data.points(i, j));
    }
    if (data.has_labels()) body += ',' + std::to_string(data.labels[i]);
    body += '\n';
  }
  detail::write_file(path, body);
}

}  // namespace rmdgraph
