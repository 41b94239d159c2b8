#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rmdgraph/dataset.hpp"
#include "rmdgraph/evaluate.hpp"
#include "rmdgraph/graph.hpp"
#include "rmdgraph/rank.hpp"
#include "rmdgraph/select.hpp"
#include "rmdgraph/spectral.hpp"
#include "rmdgraph/ssl.hpp"

namespace rmdgraph {

inline constexpr const char* kVersion = "0.1.0";

/// Schema violations in experiment configs; the CLI maps these to exit 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DataSourceConfig {
  std::string file;       // CSV path, or
  std::string generator;  // "gaussian-mixture" | "two-moons"
  long n = 0;
  MixtureSpec mixture;
  std::array<double, 3> fractions = {0.45, 0.45, 0.10};
  double noise = 0.1;
  std::vector<long> subsample_counts;  // optional per-class counts
};

struct GraphConfig {
  std::string method = "knn";  // knn | rmd | eps | full-rbf
  int k = 30;
  double lambda = 1.0;
  double eps = 0.0;
  std::string weight = "unit";  // unit | rbf
  double sigma = 0.0;           // absolute, or
  double sigma_factor = 0.0;    // sigma = factor * mean k-NN distance
};

struct RankConfig {
  int l = 30;
  int B = 5;
  std::string variant = "avg-knn";
  double eps = 0.0;
};

struct SelectionConfig {
  std::string mode = "none";  // none | lambda | baseline
  double delta = 0.05;
  std::vector<double> lambda_grid = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  std::string baseline_method = "knn";
  std::vector<int> k_grid = {20, 30, 40, 50, 60, 70, 80, 90, 100};
  std::vector<int> sigma_exponents = {-4, -3, -2, -1, 0, 1, 2, 3, 4};
};

struct SweepConfig {
  bool enabled = false;
  int axis = 0;
  std::vector<double> positions;
  int seeds = 20;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 0;
  DataSourceConfig data;
  RankConfig ranks;
  GraphConfig graph;
  std::string algorithm = "sc";  // sc | grf
  int K = 2;
  bool normalized = false;
  long label_count = 20;  // grf
  SelectionConfig selection;
  SweepConfig sweep;
  nlohmann::json raw;  // the parsed JSON, kept canonical for hashing
};

namespace detail {

template <class T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

template <class T>
T require(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) {
    throw ConfigError(std::string("missing required field '") + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

/// Parses and validates an experiment config. Accepts a manifest produced
/// by a previous run transparently (the embedded "config" object is used),
/// which is what makes reruns bit-reproducible from the manifest alone.
inline ExperimentConfig parse_config(nlohmann::json j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  if (j.contains("config") && j.contains("config_hash")) j = j.at("config");

  ExperimentConfig cfg;
  cfg.raw = j;
  cfg.name = detail::get_or<std::string>(j, "name", "experiment");
  cfg.seed = detail::require<std::uint64_t>(j, "seed");

  const auto dj = j.contains("data") ? j.at("data") : nlohmann::json::object();
  if (dj.contains("file")) {
    cfg.data.file = detail::require<std::string>(dj, "file");
  } else if (dj.contains("generator")) {
    cfg.data.generator = detail::require<std::string>(dj, "generator");
    cfg.data.n = detail::require<long>(dj, "n");
    if (cfg.data.n < 2) throw ConfigError("data.n must be >= 2");
    if (cfg.data.generator == "gaussian-mixture") {
      if (!dj.contains("mixture")) throw ConfigError("missing data.mixture");
      try {
        cfg.data.mixture = MixtureSpec::from_json(dj.at("mixture"));
      } catch (const std::exception& e) {
        throw ConfigError(std::string("data.mixture: ") + e.what());
      }
    } else if (cfg.data.generator == "two-moons") {
      const auto f = detail::get_or<std::vector<double>>(
          dj, "fractions", {0.45, 0.45, 0.10});
      if (f.size() != 3) throw ConfigError("data.fractions needs 3 entries");
      cfg.data.fractions = {f[0], f[1], f[2]};
      cfg.data.noise = detail::get_or<double>(dj, "noise", 0.1);
    } else {
      throw ConfigError("unknown generator '" + cfg.data.generator + "'");
    }
  } else {
    throw ConfigError("data needs either 'file' or 'generator'");
  }
  cfg.data.subsample_counts =
      detail::get_or<std::vector<long>>(dj, "subsample", {});

  const auto rj = j.contains("ranks") ? j.at("ranks") : nlohmann::json::object();
  cfg.ranks.l = detail::get_or<int>(rj, "l", 30);
  cfg.ranks.B = detail::get_or<int>(rj, "B", 5);
  cfg.ranks.variant = detail::get_or<std::string>(rj, "variant", "avg-knn");
  cfg.ranks.eps = detail::get_or<double>(rj, "eps", 0.0);
  StatVariant::kind_from_string(cfg.ranks.variant);  // validates
  if (cfg.ranks.l < 1 || cfg.ranks.B < 1) {
    throw ConfigError("ranks.l and ranks.B must be >= 1");
  }

  const auto gj = j.contains("graph") ? j.at("graph") : nlohmann::json::object();
  cfg.graph.method = detail::get_or<std::string>(gj, "method", "knn");
  if (cfg.graph.method != "knn" && cfg.graph.method != "rmd" &&
      cfg.graph.method != "eps" && cfg.graph.method != "full-rbf") {
    throw ConfigError("unknown graph.method '" + cfg.graph.method + "'");
  }
  cfg.graph.k = detail::get_or<int>(gj, "k", 30);
  cfg.graph.lambda = detail::get_or<double>(gj, "lambda", 1.0);
  cfg.graph.eps = detail::get_or<double>(gj, "eps", 0.0);
  cfg.graph.weight = detail::get_or<std::string>(gj, "weight", "unit");
  cfg.graph.sigma = detail::get_or<double>(gj, "sigma", 0.0);
  cfg.graph.sigma_factor = detail::get_or<double>(gj, "sigma_factor", 0.0);
  if (cfg.graph.weight != "unit" && cfg.graph.weight != "rbf") {
    throw ConfigError("graph.weight must be 'unit' or 'rbf'");
  }
  if (cfg.graph.k < 1) throw ConfigError("graph.k must be >= 1");
  if (cfg.graph.method == "rmd" &&
      !(cfg.graph.lambda >= 0.0 && cfg.graph.lambda <= 1.0)) {
    throw ConfigError("graph.lambda must be in [0, 1]");
  }
  if (cfg.graph.method == "eps" && !(cfg.graph.eps > 0.0)) {
    throw ConfigError("graph.eps must be > 0");
  }

  cfg.algorithm = detail::get_or<std::string>(j, "algorithm", "sc");
  if (cfg.algorithm != "sc" && cfg.algorithm != "grf") {
    throw ConfigError("algorithm must be 'sc' or 'grf'");
  }
  cfg.K = detail::get_or<int>(j, "K", 2);
  if (cfg.K < 2) throw ConfigError("K must be >= 2");
  cfg.normalized = detail::get_or<bool>(j, "normalized", false);
  cfg.label_count = detail::get_or<long>(j, "labels", 20);

  if (j.contains("selection")) {
    const auto sj = j.at("selection");
    cfg.selection.mode = detail::require<std::string>(sj, "mode");
    if (cfg.selection.mode != "lambda" && cfg.selection.mode != "baseline" &&
        cfg.selection.mode != "none") {
      throw ConfigError("selection.mode must be lambda, baseline or none");
    }
    cfg.selection.delta = detail::get_or<double>(sj, "delta", 0.05);
    cfg.selection.lambda_grid = detail::get_or<std::vector<double>>(
        sj, "lambda_grid", cfg.selection.lambda_grid);
    cfg.selection.baseline_method =
        detail::get_or<std::string>(sj, "method", "knn");
    cfg.selection.k_grid =
        detail::get_or<std::vector<int>>(sj, "k_grid", cfg.selection.k_grid);
    cfg.selection.sigma_exponents = detail::get_or<std::vector<int>>(
        sj, "sigma_exponents", cfg.selection.sigma_exponents);
    if (cfg.selection.mode != "none" && cfg.selection.lambda_grid.empty()) {
      throw ConfigError("selection.lambda_grid must be non-empty");
    }
    if (!(cfg.selection.delta > 0.0 && cfg.selection.delta < 1.0)) {
      throw ConfigError("selection.delta must be in (0, 1)");
    }
  }

  if (j.contains("sweep")) {
    const auto sj = j.at("sweep");
    cfg.sweep.enabled = true;
    cfg.sweep.axis = detail::get_or<int>(sj, "axis", 0);
    if (sj.contains("positions")) {
      cfg.sweep.positions = detail::require<std::vector<double>>(sj, "positions");
    } else {
      const double start = detail::require<double>(sj, "start");
      const double step = detail::require<double>(sj, "step");
      const double stop = detail::require<double>(sj, "stop");
      if (!(step > 0.0) || stop < start) {
        throw ConfigError("sweep needs step > 0 and stop >= start");
      }
      for (double p = start; p <= stop + 1e-12; p += step) {
        cfg.sweep.positions.push_back(p);
      }
    }
    if (cfg.sweep.positions.empty()) throw ConfigError("sweep.positions empty");
    for (std::size_t i = 0; i + 1 < cfg.sweep.positions.size(); ++i) {
      if (cfg.sweep.positions[i] >= cfg.sweep.positions[i + 1]) {
        throw ConfigError("sweep.positions must be strictly increasing");
      }
    }
    cfg.sweep.seeds = detail::get_or<int>(sj, "seeds", 20);
    if (cfg.sweep.seeds < 1) throw ConfigError("sweep.seeds must be >= 1");
  }
  return cfg;
}

inline ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_config(std::move(j));
}

namespace detail {

/// Materializes the configured data source. Generator sources honor the
/// given seed; file sources are fixed data (the seed only drives an
/// optional subsample).
inline Dataset realize_data(const DataSourceConfig& src, std::uint64_t seed) {
  Dataset data = [&] {
    if (!src.file.empty()) return load_csv_dataset(src.file);
    if (src.generator == "gaussian-mixture") {
      return generate_gaussian_mixture(src.mixture, src.n, seed);
    }
    return generate_two_moons_gaussian(src.n, src.fractions, src.noise, seed);
  }();
  if (!src.subsample_counts.empty()) {
    data = subsample_by_class(data, src.subsample_counts,
                              derive_seed(seed, "subsample"));
  }
  return data;
}

inline StatVariant rank_variant(const RankConfig& rc) {
  StatVariant v;
  v.kind = StatVariant::kind_from_string(rc.variant);
  v.l = rc.l;
  v.eps = rc.eps;
  return v;
}

inline EdgeWeight edge_weight(const GraphConfig& gc, const Dataset& data) {
  if (gc.weight == "unit") return EdgeWeight::unit();
  double sigma = gc.sigma;
  if (!(sigma > 0.0)) {
    if (!(gc.sigma_factor > 0.0)) {
      throw ConfigError("rbf weights need graph.sigma or graph.sigma_factor");
    }
    sigma = gc.sigma_factor * mean_knn_distance(data, gc.k);
  }
  return EdgeWeight::rbf(sigma);
}

/// Builds the configured graph; computes ranks on demand for rmd.
inline Graph build_configured_graph(const ExperimentConfig& cfg,
                                    const Dataset& data, std::uint64_t seed,
                                    RankVector* ranks_out = nullptr) {
  const auto weight = edge_weight(cfg.graph, data);
  if (cfg.graph.method == "knn") {
    return build_knn_graph(data, cfg.graph.k, weight);
  }
  if (cfg.graph.method == "eps") {
    return build_epsilon_graph(data, cfg.graph.eps, weight);
  }
  if (cfg.graph.method == "full-rbf") {
    double sigma = cfg.graph.sigma;
    if (!(sigma > 0.0)) {
      if (!(cfg.graph.sigma_factor > 0.0)) {
        throw ConfigError("full-rbf needs graph.sigma or graph.sigma_factor");
      }
      sigma = cfg.graph.sigma_factor * mean_knn_distance(data, cfg.graph.k);
    }
    return build_full_rbf_graph(data, sigma);
  }
  const RankVector ranks = compute_ranks(data, rank_variant(cfg.ranks),
                                         cfg.ranks.B,
                                         derive_seed(seed, "ranks"));
  if (ranks_out) *ranks_out = ranks;
  return build_rmd_graph(data, ranks, cfg.graph.k, cfg.graph.lambda, weight)
      .graph;
}

/// label_count seed labels from the ground truth: one random sample per
/// class first, then uniform fills.
inline LabelSet draw_labels(const Dataset& data, long label_count,
                            std::uint64_t seed) {
  if (!data.has_labels()) {
    throw std::runtime_error("label draws need ground-truth labels");
  }
  const int K = data.num_classes();
  if (label_count < K || label_count > data.n()) {
    throw std::runtime_error("label count must be in [K, n]");
  }
  Rng rng(derive_seed(seed, "label-draw"));
  std::vector<char> chosen(data.n(), 0);
  LabelSet ls;
  ls.K = K;
  std::vector<std::vector<long>> by_class(K);
  for (long i = 0; i < data.n(); ++i) by_class[data.labels[i]].push_back(i);
  for (int c = 0; c < K; ++c) {
    const long pick = by_class[c][rng.index(by_class[c].size())];
    chosen[pick] = 1;
    ls.pairs.emplace_back(static_cast<int>(pick), c);
  }
  long remaining = label_count - K;
  while (remaining > 0) {
    const long pick = static_cast<long>(rng.index(data.n()));
    if (chosen[pick]) continue;
    chosen[pick] = 1;
    ls.pairs.emplace_back(static_cast<int>(pick), data.labels[pick]);
    --remaining;
  }
  std::sort(ls.pairs.begin(), ls.pairs.end());
  return ls;
}

/// SSL error convention: fraction of misclassified unlabeled points.
inline double ssl_error(const Propagation& prop, const LabelSet& labels,
                        const std::vector<int>& truth) {
  std::vector<char> labeled(truth.size(), 0);
  for (const auto& [idx, c] : labels.pairs) labeled[idx] = 1;
  long wrong = 0, total = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (labeled[i]) continue;
    ++total;
    if (prop.prediction.assignment[i] != truth[i]) ++wrong;
  }
  if (total == 0) return 0.0;
  return static_cast<double>(wrong) / static_cast<double>(total);
}

}  // namespace detail

struct CutlineRow {
  double position = 0.0;
  double mean_cut = std::numeric_limits<double>::quiet_NaN();
  double mean_ratiocut = std::numeric_limits<double>::quiet_NaN();
  int samples = 0;  // seeds that produced a two-sided split
};

/// Cut and ratio-cut of axis-aligned hyperplane splits, averaged over
/// seeded Monte Carlo runs. `make_run` maps a run seed to the dataset and
/// graph of that run (regenerating data per seed for synthetic sources).
/// Degenerate (one-sided) positions are recorded with samples = 0.
inline std::vector<CutlineRow> sweep_cutline(
    const std::function<std::pair<Dataset, Graph>(std::uint64_t)>& make_run,
    int axis, const std::vector<double>& positions, int seeds,
    std::uint64_t base_seed) {
  if (positions.empty()) throw std::invalid_argument("no sweep positions");
  if (seeds < 1) throw std::invalid_argument("need seeds >= 1");
  std::vector<CutlineRow> rows(positions.size());
  for (std::size_t p = 0; p < positions.size(); ++p) {
    rows[p].position = positions[p];
    rows[p].mean_cut = 0.0;
    rows[p].mean_ratiocut = 0.0;
  }
  for (int s = 0; s < seeds; ++s) {
    const std::uint64_t run_seed =
        derive_seed(base_seed, "cutline-run", static_cast<std::uint64_t>(s));
    const auto [data, graph] = make_run(run_seed);
    if (axis < 0 || axis >= data.dim()) {
      throw std::invalid_argument("sweep axis out of range");
    }
    for (std::size_t p = 0; p < positions.size(); ++p) {
      const auto part = hyperplane_partition(
          data, Hyperplane::axis(axis, positions[p], data.dim()),
          derive_seed(run_seed, "cutline-ties", p));
      if (part.degenerate()) continue;
      const auto rep = cut_metrics(graph, part);
      rows[p].mean_cut += rep.cut;
      rows[p].mean_ratiocut += rep.ratio_cut;
      ++rows[p].samples;
    }
  }
  for (auto& row : rows) {
    if (row.samples > 0) {
      row.mean_cut /= row.samples;
      row.mean_ratiocut /= row.samples;
    } else {
      row.mean_cut = std::numeric_limits<double>::quiet_NaN();
      row.mean_ratiocut = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return rows;
}

inline void save_cutline_csv(const std::vector<CutlineRow>& rows,
                             const std::string& path) {
  std::string body = "position,cut,ratiocut,samples\n";
  for (const auto& r : rows) {
    body += detail::fmt_double(r.position) + ',' +
            (r.samples ? detail::fmt_double(r.mean_cut) : "nan") + ',' +
            (r.samples ? detail::fmt_double(r.mean_ratiocut) : "nan") + ',' +
            std::to_string(r.samples) + '\n';
  }
  detail::write_file(path, body);
}

inline void save_delta_curve_csv(const DeltaCurve& curve,
                                 const std::string& path) {
  std::string body = "delta,feasible,cut,position,lambda\n";
  for (const auto& p : curve.points) {
    body += detail::fmt_double(p.delta) + ',' + (p.feasible ? "1" : "0") + ',';
    body += (p.feasible ? detail::fmt_double(p.cut) : "nan");
    body += ',';
    body += (p.feasible ? detail::fmt_double(p.position) : "nan");
    body += ',';
    body += (p.feasible ? detail::fmt_double(p.lambda) : "nan");
    body += '\n';
  }
  detail::write_file(path, body);
}

inline nlohmann::json selection_to_json(const SelectionResult& sel) {
  auto entry_json = [](const TraceEntry& e) {
    nlohmann::json j{{"k", e.k},
                     {"cut", e.cut},
                     {"min_fraction", e.min_fraction},
                     {"feasible", e.feasible}};
    if (std::isfinite(e.lambda)) j["lambda"] = e.lambda;
    if (std::isfinite(e.sigma)) j["sigma"] = e.sigma;
    if (std::isfinite(e.position)) j["position"] = e.position;
    return j;
  };
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& e : sel.trace) trace.push_back(entry_json(e));
  return {{"chosen", entry_json(sel.chosen)},
          {"objective", sel.objective},
          {"trace", trace}};
}

inline nlohmann::json eval_report_to_json(const EvalReport& rep) {
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& t : rep.trials) {
    nlohmann::json tj{{"seed", t.seed}, {"ok", t.ok}};
    if (t.ok) {
      tj["error"] = t.error;
    } else {
      tj["message"] = t.message;
    }
    trials.push_back(tj);
  }
  return {{"error_rate", rep.error_rate},
          {"mean_error", rep.mean_error},
          {"std_error", rep.std_error},
          {"confusion", rep.confusion},
          {"permutation", rep.permutation},
          {"trials", trials}};
}

struct PipelineOutcome {
  int exit_code = 0;
  nlohmann::json manifest;
};

/// Runs the configured experiment end to end, writing every stage artifact
/// under out_dir plus a manifest that embeds the config (rerunning from the
/// manifest reproduces all outputs byte for byte). A stage failure keeps
/// the artifacts written so far and names the failed stage in the manifest.
inline PipelineOutcome run_pipeline(const ExperimentConfig& cfg,
                                    const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  auto path = [&](const char* name) { return (fs::path(out_dir) / name).string(); };

  PipelineOutcome outcome;
  nlohmann::json& manifest = outcome.manifest;
  manifest["tool"] = "rmdgraph";
  manifest["version"] = kVersion;
  manifest["config"] = cfg.raw;
  char hash[24];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(
                    detail::fnv1a64(cfg.raw.dump())));
  manifest["config_hash"] = hash;
  manifest["seed"] = cfg.seed;
  manifest["artifacts"] = nlohmann::json::array();
  manifest["failed_stage"] = nullptr;

  auto record = [&](const std::string& file) {
    manifest["artifacts"].push_back(file);
  };
  auto finish = [&](int code) {
    detail::write_file(path("manifest.json"), manifest.dump(2) + "\n");
    outcome.exit_code = code;
    return outcome;
  };

  std::string stage = "data";
  try {
    const Dataset data =
        detail::realize_data(cfg.data, derive_seed(cfg.seed, "data"));
    save_csv_dataset(data, path("data.csv"));
    record("data.csv");

    Partition result_partition;
    bool have_partition = false;

    if (cfg.selection.mode == "lambda") {
      stage = "selection";
      RmdParams params;
      params.k = cfg.graph.k;
      params.l = cfg.ranks.l;
      params.B = cfg.ranks.B;
      params.statistic = StatVariant::kind_from_string(cfg.ranks.variant);
      params.weight = detail::edge_weight(cfg.graph, data);
      params.lambda_grid = cfg.selection.lambda_grid;
      params.K = cfg.K;
      params.normalized = cfg.normalized;
      const std::uint64_t sel_seed = derive_seed(cfg.seed, "selection");
      const auto sel = optimize_lambda(data, params, cfg.selection.delta,
                                       sel_seed);
      detail::write_file(path("selection.json"),
                         selection_to_json(sel).dump(2) + "\n");
      record("selection.json");

      // Re-derive the chosen configuration's artifacts (deterministic).
      const auto ranks =
          compute_ranks(data, StatVariant{params.statistic, params.l, 0.0},
                        params.B, derive_seed(sel_seed, "ranks"));
      save_ranks_csv(ranks, path("ranks.csv"));
      record("ranks.csv");
      const auto built = build_rmd_graph(data, ranks, params.k,
                                         sel.chosen.lambda, params.weight);
      save_graph_csv(built.graph, path("graph.csv"));
      record("graph.csv");
      result_partition = sel.chosen.partition;
      have_partition = true;
    } else if (cfg.selection.mode == "baseline") {
      stage = "selection";
      BaselineParams params;
      params.method = cfg.selection.baseline_method;
      params.k_grid = cfg.selection.k_grid;
      params.sigma_exponents = cfg.selection.sigma_exponents;
      params.K = cfg.K;
      params.normalized = cfg.normalized;
      const auto sel = optimize_baseline(data, params, cfg.selection.delta,
                                         derive_seed(cfg.seed, "selection"));
      detail::write_file(path("selection.json"),
                         selection_to_json(sel).dump(2) + "\n");
      record("selection.json");
      result_partition = sel.chosen.partition;
      have_partition = true;
    } else {
      stage = "graph";
      RankVector ranks;
      const Graph graph =
          detail::build_configured_graph(cfg, data, cfg.seed,
                                         cfg.graph.method == "rmd" ? &ranks
                                                                   : nullptr);
      if (cfg.graph.method == "rmd") {
        save_ranks_csv(ranks, path("ranks.csv"));
        record("ranks.csv");
      }
      save_graph_csv(graph, path("graph.csv"));
      record("graph.csv");

      if (cfg.algorithm == "sc") {
        stage = "cluster";
        result_partition = spectral_cluster(graph, cfg.K, cfg.normalized,
                                            derive_seed(cfg.seed, "sc"));
        have_partition = true;
      } else {
        stage = "ssl";
        const auto labels =
            detail::draw_labels(data, cfg.label_count,
                                derive_seed(cfg.seed, "labels"));
        save_labels_csv(labels, path("labels.csv"));
        record("labels.csv");
        const auto prop = grf_propagate(graph, labels);
        std::string body = "index,class\n";
        for (long i = 0; i < prop.prediction.n(); ++i) {
          body += std::to_string(i) + ',' +
                  std::to_string(prop.prediction.assignment[i]) + '\n';
        }
        detail::write_file(path("pred.csv"), body);
        record("pred.csv");

        if (data.has_labels()) {
          stage = "eval";
          const double err = detail::ssl_error(prop, labels, data.labels);
          nlohmann::json rep{{"error_rate", err},
                             {"evaluated_on", "unlabeled"},
                             {"labeled", labels.pairs.size()}};
          detail::write_file(path("report.json"), rep.dump(2) + "\n");
          record("report.json");
        }
      }
    }

    if (have_partition) {
      stage = "partition";
      save_partition_csv(result_partition, path("partition.csv"));
      record("partition.csv");
      if (data.has_labels() && cfg.algorithm == "sc") {
        stage = "eval";
        const auto rep = clustering_error(result_partition, data.labels);
        detail::write_file(path("report.json"),
                           eval_report_to_json(rep).dump(2) + "\n");
        record("report.json");
      }
    }

    if (cfg.sweep.enabled) {
      stage = "sweep";
      auto make_run = [&](std::uint64_t run_seed) {
        Dataset run_data = detail::realize_data(cfg.data, run_seed);
        Graph g = detail::build_configured_graph(cfg, run_data, run_seed);
        return std::pair<Dataset, Graph>(std::move(run_data), std::move(g));
      };
      const auto rows =
          sweep_cutline(make_run, cfg.sweep.axis, cfg.sweep.positions,
                        cfg.sweep.seeds, derive_seed(cfg.seed, "sweep"));
      save_cutline_csv(rows, path("curve.csv"));
      record("curve.csv");
    }
  } catch (const std::exception& e) {
    manifest["failed_stage"] = stage;
    manifest["error"] = e.what();
    return finish(1);
  }
  return finish(0);
}

/// Seeded trial protocol: each trial re-realizes the data source, builds
/// the configured graph and scores the configured algorithm against ground
/// truth (spectral clustering over all points; label propagation over the
/// unlabeled ones, with a fresh label draw per trial).
inline EvalReport run_trials_config(const ExperimentConfig& cfg, int T,
                                    std::uint64_t base_seed) {
  return run_trials(T, base_seed, [&](std::uint64_t trial_seed) {
    const Dataset data = detail::realize_data(cfg.data, trial_seed);
    if (!data.has_labels()) {
      throw std::runtime_error("trials need ground-truth labels");
    }
    const Graph graph = detail::build_configured_graph(cfg, data, trial_seed);
    if (cfg.algorithm == "sc") {
      const auto part = spectral_cluster(graph, cfg.K, cfg.normalized,
                                         derive_seed(trial_seed, "sc"));
      return clustering_error(part, data.labels).error_rate;
    }
    const auto labels = detail::draw_labels(data, cfg.label_count,
                                            derive_seed(trial_seed, "labels"));
    const auto prop = grf_propagate(graph, labels);
    return detail::ssl_error(prop, labels, data.labels);
  });
}

}  // namespace rmdgraph
