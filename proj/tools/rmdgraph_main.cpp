// Command-line front end: dataset generation, rank computation, graph
// construction, clustering, label propagation, model selection and the
// experiment pipelines, all emitting plot-ready CSV/JSON.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "rmdgraph/rmdgraph.hpp"

namespace {

using nlohmann::json;
using namespace rmdgraph;

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& tok : detail::split(text, ',')) {
    double v;
    if (!detail::parse_double(tok, v)) {
      throw ConfigError("malformed number list '" + text + "'");
    }
    out.push_back(v);
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (const auto& tok : detail::split(text, ',')) {
    long v;
    if (!detail::parse_int(tok, v)) {
      throw ConfigError("malformed integer list '" + text + "'");
    }
    out.push_back(static_cast<int>(v));
  }
  return out;
}

/// "a:step:b" inclusive range, or a plain comma list.
std::vector<double> parse_positions(const std::string& text) {
  const auto parts = detail::split(text, ':');
  if (parts.size() == 3) {
    double a, step, b;
    if (!detail::parse_double(parts[0], a) ||
        !detail::parse_double(parts[1], step) ||
        !detail::parse_double(parts[2], b) || !(step > 0.0) || b < a) {
      throw ConfigError("malformed range '" + text + "'");
    }
    std::vector<double> out;
    for (double p = a; p <= b + 1e-12; p += step) out.push_back(p);
    return out;
  }
  return parse_double_list(text);
}

json load_json_arg(const std::string& arg) {
  if (!arg.empty() && arg.front() == '{') return json::parse(arg);
  std::ifstream in(arg);
  if (!in) throw ConfigError(arg + ": cannot open");
  return json::parse(in);
}

StatVariant variant_from_flags(const std::string& name, int l, double eps) {
  StatVariant v;
  v.kind = StatVariant::kind_from_string(name);
  v.l = l;
  v.eps = eps;
  v.validate();
  return v;
}

EdgeWeight weight_from_flags(const std::string& scheme, double sigma) {
  if (scheme == "unit") return EdgeWeight::unit();
  if (scheme == "rbf") return EdgeWeight::rbf(sigma);
  throw ConfigError("weight must be 'unit' or 'rbf'");
}

void write_json(const json& j, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << j.dump(2) << '\n';
  } else {
    detail::write_file(out, j.dump(2) + "\n");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rank-modulated degree graphs for clustering and SSL"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads,
                 "cap worker threads (overrides RMDGRAPH_THREADS)");

  // ---- gen ----------------------------------------------------------
  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
  std::string gen_mixture, gen_fractions = "0.45,0.45,0.10", gen_out;
  long gen_n = 1000;
  double gen_noise = 0.1;
  bool gen_moons = false;
  std::uint64_t gen_seed = 0;
  gen->add_option("--mixture", gen_mixture,
                  "mixture spec (JSON file or inline JSON)");
  gen->add_flag("--two-moons", gen_moons, "two moons plus a Gaussian blob");
  gen->add_option("--fractions", gen_fractions, "two-moons class fractions");
  gen->add_option("--noise", gen_noise, "two-moons noise sigma");
  gen->add_option("--n", gen_n, "sample count")->required();
  gen->add_option("--seed", gen_seed, "random seed")->required();
  gen->add_option("--out", gen_out, "output CSV")->required();

  // ---- rank ---------------------------------------------------------
  auto* rank = app.add_subcommand("rank", "compute density ranks");
  std::string rank_in, rank_out, rank_variant = "avg-knn";
  int rank_l = 30, rank_B = 5;
  double rank_eps = 0.0;
  std::uint64_t rank_seed = 0;
  rank->add_option("--in", rank_in)->required();
  rank->add_option("--l", rank_l, "neighbor scale");
  rank->add_option("--B", rank_B, "resample count");
  rank->add_option("--variant", rank_variant,
                   "avg-knn | weighted-avg-knn | lnn | eps-count");
  rank->add_option("--eps", rank_eps, "radius for eps-count");
  rank->add_option("--seed", rank_seed)->required();
  rank->add_option("--out", rank_out)->required();

  // ---- build --------------------------------------------------------
  auto* build = app.add_subcommand("build", "construct a graph");
  std::string build_in, build_out, build_method = "knn",
              build_weight = "unit", build_ranks;
  int build_k = 30;
  double build_lambda = 1.0, build_eps = 0.0, build_sigma = 0.0;
  build->add_option("--in", build_in)->required();
  build->add_option("--method", build_method, "knn | rmd | eps | full-rbf");
  build->add_option("--k", build_k);
  build->add_option("--lambda", build_lambda, "degree modulation (rmd)");
  build->add_option("--eps", build_eps, "radius (eps graph)");
  build->add_option("--sigma", build_sigma, "rbf bandwidth");
  build->add_option("--weight", build_weight, "unit | rbf");
  build->add_option("--ranks", build_ranks, "ranks CSV (rmd)");
  build->add_option("--out", build_out)->required();

  // ---- cluster ------------------------------------------------------
  auto* cluster = app.add_subcommand("cluster", "spectral clustering");
  std::string cluster_graph, cluster_out;
  int cluster_K = 2;
  bool cluster_norm = false;
  std::uint64_t cluster_seed = 0;
  cluster->add_option("--graph", cluster_graph)->required();
  cluster->add_option("--K", cluster_K);
  cluster->add_flag("--normalized", cluster_norm);
  cluster->add_option("--seed", cluster_seed);
  cluster->add_option("--out", cluster_out)->required();

  // ---- ssl ----------------------------------------------------------
  auto* ssl = app.add_subcommand("ssl", "harmonic label propagation");
  std::string ssl_graph, ssl_labels, ssl_out;
  ssl->add_option("--graph", ssl_graph)->required();
  ssl->add_option("--labels", ssl_labels)->required();
  ssl->add_option("--out", ssl_out)->required();

  // ---- select -------------------------------------------------------
  auto* select = app.add_subcommand("select", "constrained model selection");
  std::string sel_in, sel_out, sel_mode = "lambda", sel_grid,
              sel_method = "knn", sel_kgrid, sel_jgrid, sel_weight = "unit";
  int sel_k = 30, sel_l = 30, sel_B = 5, sel_K = 2;
  double sel_delta = 0.05, sel_sigma = 0.0;
  bool sel_norm = false;
  std::uint64_t sel_seed = 0;
  select->add_option("--in", sel_in)->required();
  select->add_option("--mode", sel_mode, "lambda | baseline");
  select->add_option("--delta", sel_delta, "minimum cluster fraction");
  select->add_option("--grid", sel_grid, "lambda grid (comma list)");
  select->add_option("--k", sel_k);
  select->add_option("--l", sel_l);
  select->add_option("--B", sel_B);
  select->add_option("--K", sel_K);
  select->add_option("--weight", sel_weight, "unit | rbf (rmd edges)");
  select->add_option("--sigma", sel_sigma, "rbf bandwidth for --weight rbf");
  select->add_option("--method", sel_method, "baseline: knn | full-rbf | eps");
  select->add_option("--k-grid", sel_kgrid, "baseline k grid");
  select->add_option("--j-grid", sel_jgrid, "baseline sigma exponents");
  select->add_flag("--normalized", sel_norm);
  select->add_option("--seed", sel_seed)->required();
  select->add_option("--out", sel_out)->required();

  // ---- sweep-delta --------------------------------------------------
  auto* sdelta = app.add_subcommand("sweep-delta",
                                    "constrained cut vs cluster-size bound");
  std::string sd_in, sd_out, sd_deltas = "0.30,0.25,0.20,0.15,0.10,0.05",
              sd_grid;
  int sd_k = 30, sd_l = 30, sd_B = 5;
  double sd_rel_tol = 0.05, sd_pos_tol = 0.5;
  std::uint64_t sd_seed = 0;
  sdelta->add_option("--in", sd_in)->required();
  sdelta->add_option("--deltas", sd_deltas, "descending delta grid");
  sdelta->add_option("--lambda-grid", sd_grid);
  sdelta->add_option("--k", sd_k);
  sdelta->add_option("--l", sd_l);
  sdelta->add_option("--B", sd_B);
  sdelta->add_option("--rel-tol", sd_rel_tol, "flat-spot cut tolerance");
  sdelta->add_option("--pos-tol", sd_pos_tol, "flat-spot position tolerance");
  sdelta->add_option("--seed", sd_seed)->required();
  sdelta->add_option("--out", sd_out)->required();

  // ---- sweep-cutline ------------------------------------------------
  auto* scut = app.add_subcommand("sweep-cutline",
                                  "hyperplane cut curve over positions");
  std::string sc_in, sc_out, sc_method = "rmd", sc_weight = "unit",
              sc_positions = "0:0.25:6";
  int sc_k = 30, sc_l = 30, sc_B = 5, sc_axis = 0, sc_seeds = 20;
  double sc_lambda = 0.4, sc_eps = 0.0, sc_sigma = 0.0;
  std::uint64_t sc_seed = 0;
  scut->add_option("--in", sc_in)->required();
  scut->add_option("--method", sc_method, "knn | rmd | eps | full-rbf");
  scut->add_option("--k", sc_k);
  scut->add_option("--l", sc_l);
  scut->add_option("--B", sc_B);
  scut->add_option("--lambda", sc_lambda);
  scut->add_option("--eps", sc_eps);
  scut->add_option("--sigma", sc_sigma);
  scut->add_option("--weight", sc_weight);
  scut->add_option("--axis", sc_axis);
  scut->add_option("--positions", sc_positions, "comma list or a:step:b");
  scut->add_option("--seeds", sc_seeds, "Monte Carlo runs");
  scut->add_option("--seed", sc_seed)->required();
  scut->add_option("--out", sc_out)->required();

  // ---- limit-check --------------------------------------------------
  auto* limit = app.add_subcommand(
      "limit-check", "analytic limit cut vs empirical scaled ratio cut");
  std::string lc_mixture, lc_out;
  int lc_axis = 0, lc_n = 2000, lc_seeds = 10, lc_k = 0, lc_l = 0, lc_B = 5;
  double lc_at = 0.0, lc_lambda = 0.4;
  std::uint64_t lc_seed = 0;
  limit->add_option("--mixture", lc_mixture)->required();
  limit->add_option("--cut-axis", lc_axis);
  limit->add_option("--cut-at", lc_at)->required();
  limit->add_option("--lambda", lc_lambda);
  limit->add_option("--n", lc_n);
  limit->add_option("--seeds", lc_seeds);
  limit->add_option("--k", lc_k, "graph degree (default ceil(n^0.6/2))");
  limit->add_option("--l", lc_l, "rank neighbor scale (default k)");
  limit->add_option("--B", lc_B);
  limit->add_option("--seed", lc_seed);
  limit->add_option("--out", lc_out, "output JSON (default stdout)");

  // ---- eval ---------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "score a partition against labels");
  std::string eval_pred, eval_truth, eval_out;
  eval->add_option("--pred", eval_pred)->required();
  eval->add_option("--truth", eval_truth, "labeled dataset CSV")->required();
  eval->add_option("--out", eval_out, "output JSON (default stdout)");

  // ---- trials -------------------------------------------------------
  auto* trials = app.add_subcommand("trials", "seeded trial protocol");
  std::string tr_config, tr_out;
  int tr_T = 20;
  std::uint64_t tr_seed = 0;
  trials->add_option("--config", tr_config)->required();
  trials->add_option("--T", tr_T, "trial count");
  trials->add_option("--seed", tr_seed)->required();
  trials->add_option("--out", tr_out, "output JSON (default stdout)");

  // ---- run ----------------------------------------------------------
  auto* run = app.add_subcommand("run", "full experiment pipeline");
  std::string run_config, run_dir = "out";
  run->add_option("--config", run_config, "config or manifest JSON")
      ->required();
  run->add_option("--out-dir", run_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (threads > 0) {
    setenv("RMDGRAPH_THREADS", std::to_string(threads).c_str(), 1);
  }

  try {
    if (*gen) {
      Dataset data = [&] {
        if (gen_moons) {
          const auto f = parse_double_list(gen_fractions);
          if (f.size() != 3) throw ConfigError("--fractions needs 3 entries");
          return generate_two_moons_gaussian(gen_n, {f[0], f[1], f[2]},
                                             gen_noise, gen_seed);
        }
        if (gen_mixture.empty()) {
          throw ConfigError("gen needs --mixture or --two-moons");
        }
        const auto spec = MixtureSpec::from_json(load_json_arg(gen_mixture));
        return generate_gaussian_mixture(spec, gen_n, gen_seed);
      }();
      save_csv_dataset(data, gen_out);
    } else if (*rank) {
      const auto data = load_csv_dataset(rank_in);
      const auto variant = variant_from_flags(rank_variant, rank_l, rank_eps);
      save_ranks_csv(compute_ranks(data, variant, rank_B, rank_seed), rank_out);
    } else if (*build) {
      const auto data = load_csv_dataset(build_in);
      const auto weight = weight_from_flags(build_weight, build_sigma);
      Graph g;
      if (build_method == "knn") {
        g = build_knn_graph(data, build_k, weight);
      } else if (build_method == "rmd") {
        if (build_ranks.empty()) throw ConfigError("rmd needs --ranks");
        const auto rv = load_ranks_csv(build_ranks);
        g = build_rmd_graph(data, rv, build_k, build_lambda, weight).graph;
      } else if (build_method == "eps") {
        g = build_epsilon_graph(data, build_eps, weight);
      } else if (build_method == "full-rbf") {
        g = build_full_rbf_graph(data, build_sigma);
      } else {
        throw ConfigError("unknown method '" + build_method + "'");
      }
      save_graph_csv(g, build_out);
    } else if (*cluster) {
      const auto g = load_graph_csv(cluster_graph);
      save_partition_csv(
          spectral_cluster(g, cluster_K, cluster_norm, cluster_seed),
          cluster_out);
    } else if (*ssl) {
      const auto g = load_graph_csv(ssl_graph);
      const auto labels = load_labels_csv(ssl_labels);
      const auto prop = grf_propagate(g, labels);
      std::string body = "index,class\n";
      for (long i = 0; i < prop.prediction.n(); ++i) {
        body += std::to_string(i) + ',' +
                std::to_string(prop.prediction.assignment[i]) + '\n';
      }
      detail::write_file(ssl_out, body);
    } else if (*select) {
      const auto data = load_csv_dataset(sel_in);
      SelectionResult result;
      if (sel_mode == "lambda") {
        RmdParams params;
        params.k = sel_k;
        params.l = sel_l;
        params.B = sel_B;
        params.K = sel_K;
        params.normalized = sel_norm;
        params.weight = weight_from_flags(sel_weight, sel_sigma);
        if (!sel_grid.empty()) params.lambda_grid = parse_double_list(sel_grid);
        result = optimize_lambda(data, params, sel_delta, sel_seed);
      } else if (sel_mode == "baseline") {
        BaselineParams params;
        params.method = sel_method;
        params.K = sel_K;
        params.normalized = sel_norm;
        if (!sel_kgrid.empty()) params.k_grid = parse_int_list(sel_kgrid);
        if (!sel_jgrid.empty()) {
          params.sigma_exponents = parse_int_list(sel_jgrid);
        }
        result = optimize_baseline(data, params, sel_delta, sel_seed);
      } else {
        throw ConfigError("select --mode must be lambda or baseline");
      }
      write_json(selection_to_json(result), sel_out);
    } else if (*sdelta) {
      const auto data = load_csv_dataset(sd_in);
      RmdParams params;
      params.k = sd_k;
      params.l = sd_l;
      params.B = sd_B;
      if (!sd_grid.empty()) params.lambda_grid = parse_double_list(sd_grid);
      const auto curve = delta_sweep(data, params, parse_double_list(sd_deltas),
                                     sd_seed, sd_rel_tol, sd_pos_tol);
      save_delta_curve_csv(curve, sd_out);
      json flats = json::array();
      for (const auto& f : curve.flats) {
        flats.push_back({{"delta_high", f.delta_high},
                         {"delta_low", f.delta_low},
                         {"mean_cut", f.mean_cut},
                         {"mean_position", f.mean_position}});
      }
      detail::write_file(sd_out + ".meta.json",
                         json{{"flat_segments", flats}}.dump(2) + "\n");
    } else if (*scut) {
      const auto data = load_csv_dataset(sc_in);
      const auto weight = weight_from_flags(sc_weight, sc_sigma);
      auto make_run = [&](std::uint64_t run_seed) {
        Graph g;
        if (sc_method == "knn") {
          g = build_knn_graph(data, sc_k, weight);
        } else if (sc_method == "rmd") {
          const auto rv =
              compute_ranks(data, StatVariant::avg_knn(sc_l), sc_B,
                            derive_seed(run_seed, "ranks"));
          g = build_rmd_graph(data, rv, sc_k, sc_lambda, weight).graph;
        } else if (sc_method == "eps") {
          g = build_epsilon_graph(data, sc_eps, weight);
        } else if (sc_method == "full-rbf") {
          g = build_full_rbf_graph(data, sc_sigma);
        } else {
          throw ConfigError("unknown method '" + sc_method + "'");
        }
        return std::pair<Dataset, Graph>(data, std::move(g));
      };
      const auto rows = sweep_cutline(make_run, sc_axis,
                                      parse_positions(sc_positions), sc_seeds,
                                      sc_seed);
      save_cutline_csv(rows, sc_out);
    } else if (*limit) {
      const auto spec = MixtureSpec::from_json(load_json_arg(lc_mixture));
      const auto model = DensityModel::create(spec);
      const int k = lc_k > 0
                        ? lc_k
                        : static_cast<int>(
                              std::ceil(std::pow(lc_n, 0.6) / 2.0));
      const int l = lc_l > 0 ? lc_l : k;
      const auto pred = limit_ratiocut(model, {lc_axis, lc_at}, lc_lambda);
      const double scale =
          (1.0 / k) * std::pow(static_cast<double>(lc_n) / k,
                               1.0 / model.dim);
      std::vector<double> scaled;
      for (int s = 0; s < lc_seeds; ++s) {
        const auto run_seed =
            derive_seed(lc_seed, "limit-check", static_cast<std::uint64_t>(s));
        const auto data =
            generate_gaussian_mixture(spec, lc_n, derive_seed(run_seed, "data"));
        const auto rv = compute_ranks(data, StatVariant::avg_knn(l), lc_B,
                                      derive_seed(run_seed, "ranks"));
        const auto g =
            build_rmd_graph(data, rv, k, lc_lambda, EdgeWeight::unit()).graph;
        const auto part = hyperplane_partition(
            data, Hyperplane::axis(lc_axis, lc_at, data.dim()), run_seed);
        if (part.degenerate()) continue;
        scaled.push_back(scale * cut_metrics(g, part).ratio_cut);
      }
      if (scaled.empty()) throw std::runtime_error("all seeds degenerate");
      double mean = 0.0;
      for (double v : scaled) mean += v;
      mean /= scaled.size();
      double var = 0.0;
      for (double v : scaled) var += (v - mean) * (v - mean);
      const json out{
          {"prediction",
           {{"value", pred.value},
            {"surface_integral", pred.surface_integral},
            {"mu_plus", pred.mu_plus},
            {"mu_minus", pred.mu_minus},
            {"c_d", pred.c_d},
            {"lambda", pred.lambda}}},
          {"empirical",
           {{"mean", mean},
            {"std", std::sqrt(var / scaled.size())},
            {"per_seed", scaled},
            {"k", k},
            {"l", l},
            {"B", lc_B},
            {"n", lc_n},
            {"scale", scale}}},
          {"ratio_empirical_over_predicted", mean / pred.value}};
      write_json(out, lc_out);
    } else if (*eval) {
      const auto pred = load_partition_csv(eval_pred);
      const auto truth = load_csv_dataset(eval_truth);
      if (!truth.has_labels()) {
        throw ConfigError(eval_truth + ": no label column");
      }
      write_json(eval_report_to_json(clustering_error(pred, truth.labels)),
                 eval_out);
    } else if (*trials) {
      const auto cfg = load_config_file(tr_config);
      write_json(eval_report_to_json(run_trials_config(cfg, tr_T, tr_seed)),
                 tr_out);
    } else if (*run) {
      const auto cfg = load_config_file(run_config);
      const auto outcome = run_pipeline(cfg, run_dir);
      if (outcome.exit_code != 0) {
        std::cerr << "pipeline failed at stage '"
                  << outcome.manifest["failed_stage"].get<std::string>()
                  << "': " << outcome.manifest["error"].get<std::string>()
                  << '\n';
      }
      return outcome.exit_code;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
