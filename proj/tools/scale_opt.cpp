// Batch front end for stereo scale optimization: scene synthesis, per-
// keyframe scale recovery, the block-matching comparison, KITTI-style
// trajectory evaluation and timing benchmarks.
//
// Exit codes: 0 success, 1 input/parse error, 2 algorithmic failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <scaleopt/errors.hpp>
#include <scaleopt/evaluation.hpp>
#include <scaleopt/image_io.hpp>
#include <scaleopt/io.hpp>
#include <scaleopt/parallel.hpp>
#include <scaleopt/scale_optimizer.hpp>
#include <scaleopt/stereo_baseline.hpp>
#include <scaleopt/synthetic.hpp>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace scaleopt;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitAlgorithm = 2;

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

struct TimingStats {
  double mean = 0.0;
  double median = 0.0;
  double p95 = 0.0;
};

TimingStats timing_stats(std::vector<double> samples) {
  TimingStats t;
  if (samples.empty()) return t;
  std::sort(samples.begin(), samples.end());
  for (double v : samples) t.mean += v;
  t.mean /= double(samples.size());
  t.median = samples[samples.size() / 2];
  t.p95 = samples[std::min(samples.size() - 1, std::size_t(0.95 * double(samples.size())))];
  return t;
}

json timing_to_json(const TimingStats& t) {
  return json{{"mean_ms", t.mean}, {"median_ms", t.median}, {"p95_ms", t.p95}};
}

json result_to_json(const ScaleResult& res, std::size_t n_points) {
  json levels = json::array();
  for (const auto& tr : res.trace)
    levels.push_back(json{{"level", tr.level},
                          {"iterations", tr.iterations},
                          {"final_energy", tr.final_energy},
                          {"valid_count", tr.valid_count},
                          {"reached_tolerance", tr.reached_tolerance}});
  return json{{"scale", res.scale},
              {"initial_scale", res.initial_scale},
              {"converged", res.converged},
              {"valid_fraction", res.valid_fraction},
              {"points", n_points},
              {"levels", levels}};
}

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path, "cannot open file for writing");
  out << j.dump(2) << "\n";
  if (!out) throw ParseError(path, "write failed");
}

// Calibration argument: either a KITTI calib.txt or a scene.json sidecar.
Calibration load_calibration(const std::string& path, int width, int height) {
  std::ifstream probe(path);
  if (!probe) throw ParseError(path, "cannot open file");
  char c = 0;
  probe >> c;
  if (c == '{') {
    SceneFiles s = load_scene_json(path);
    s.calib.K0.width = width;
    s.calib.K0.height = height;
    s.calib.K1.width = width;
    s.calib.K1.height = height;
    return s.calib;
  }
  return load_kitti_calib(path, width, height);
}

bool is_rectified(const StereoExtrinsics& T) {
  return (T.rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-9 &&
         T.translation.x() < 0.0 && std::abs(T.translation.y()) < 1e-12 &&
         std::abs(T.translation.z()) < 1e-12;
}

struct LoadedScene {
  SyntheticScene scene;  // depth0 empty when not available
  std::vector<ScalePoint> points;
};

LoadedScene load_scene_dir(const std::string& dir, bool need_depth) {
  const fs::path base(dir);
  const SceneFiles files = load_scene_json((base / "scene.json").string());
  LoadedScene loaded;
  loaded.scene.img0 = load_image((base / files.img0_file).string());
  loaded.scene.img1 = load_image((base / files.img1_file).string());
  loaded.scene.s_true = files.s_true;
  loaded.scene.intrinsics = files.calib.K0;
  loaded.scene.intrinsics.width = loaded.scene.img0.width;
  loaded.scene.intrinsics.height = loaded.scene.img0.height;
  loaded.scene.extrinsics = files.calib.extrinsics;
  loaded.scene.noise_sigma = files.noise_sigma;
  loaded.scene.seed = files.seed;
  if (need_depth)
    loaded.scene.depth0 = load_raw_float(
        (base / files.depth_file).string(),
        static_cast<std::size_t>(loaded.scene.img0.width) * loaded.scene.img0.height);
  loaded.points = load_point_cloud((base / files.points_file).string(), loaded.scene.img0).points;
  return loaded;
}

std::vector<double> parse_value_list(const std::string& arg, const char* what) {
  std::vector<double> values;
  if (!arg.empty() && arg[0] == '@') {  // one value per line
    const std::string path = arg.substr(1);
    std::ifstream in(path);
    if (!in) throw ParseError(path, "cannot open file");
    double v;
    while (in >> v) values.push_back(v);
  } else {
    std::stringstream ss(arg);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) values.push_back(std::stod(tok));
  }
  if (values.empty()) throw ConfigError(std::string("empty ") + what + " list");
  return values;
}

// ---------------------------------------------------------------------------
// synth

int cmd_synth(const std::string& config_path, const std::string& out_dir) {
  const SceneConfig cfg = load_scene_config(config_path);

  // Point-sampling block of the same config file (optional).
  int n_points = 2000;
  double inv_depth_noise = 0.0;
  std::uint64_t point_seed = cfg.seed + 1;
  {
    std::ifstream in(config_path);
    json j;
    in >> j;
    if (j.contains("points")) {
      const auto& p = j.at("points");
      n_points = p.value("count", n_points);
      inv_depth_noise = p.value("inv_depth_noise", inv_depth_noise);
      point_seed = p.value("seed", point_seed);
    }
  }

  const SyntheticScene scene = render_scene(cfg);
  const auto points = sample_points(scene, n_points, inv_depth_noise, point_seed);

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  const fs::path base(out_dir);
  save_pgm(scene.img0, (base / "img0.pgm").string());
  save_pgm(scene.img1, (base / "img1.pgm").string());
  save_raw_float(scene.depth0, (base / "depth0.raw").string());
  save_scene_json(scene, (base / "scene.json").string());
  save_point_cloud(points, (base / "points.csv").string());
  std::cout << "wrote img0.pgm img1.pgm depth0.raw scene.json points.csv to " << out_dir
            << " (s_true=" << scene.s_true << ", points=" << points.size() << ")\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// optimize

struct OptimizeFlags {
  double init_scale = 1.0;
  bool init_from_matching = false;
  int levels = 4;
  double tol = 1e-5;
  int max_iterations = 15;
  double huber_gamma = 9.0;
  int min_valid_points = 50;
  double min_valid_fraction = 0.25;
  std::string weighting = "constant";
  std::string report_path;
};

OptimizerConfig to_config(const OptimizeFlags& f) {
  OptimizerConfig cfg;
  cfg.levels = f.levels;
  cfg.convergence_tol = f.tol;
  cfg.max_iterations_per_level = f.max_iterations;
  cfg.huber_gamma = f.huber_gamma;
  cfg.min_valid_points = f.min_valid_points;
  cfg.min_valid_fraction = f.min_valid_fraction;
  cfg.weight_mode =
      f.weighting == "gradient" ? PointWeightMode::gradient_weighted : PointWeightMode::constant;
  return cfg;
}

double scale_from_block_matching(const GrayImage& img0, const GrayImage& img1,
                                 const std::vector<ScalePoint>& points,
                                 const StereoExtrinsics& T, double fx,
                                 const MatchConfig& mc, double* rejected_fraction) {
  if (!is_rectified(T))
    throw ConfigError("block matching requires a rectified pair (identity rotation, x baseline)");
  std::vector<MatchResult> matches;
  matches.reserve(points.size());
  int accepted = 0;
  for (const auto& pt : points) {
    matches.push_back(epipolar_match(img0, img1, pt.host_pixel, mc));
    accepted += matches.back().accepted ? 1 : 0;
  }
  if (rejected_fraction)
    *rejected_fraction = 1.0 - double(accepted) / double(std::max<std::size_t>(points.size(), 1));
  return scale_from_matches(points, matches, fx, -T.translation.x());
}

int cmd_optimize(const std::string& calib_path, const std::string& img0_path,
                 const std::string& img1_path, const std::string& points_path,
                 const OptimizeFlags& flags) {
  const GrayImage img0 = load_image(img0_path);
  const GrayImage img1 = load_image(img1_path);
  const Calibration calib = load_calibration(calib_path, img0.width, img0.height);
  PointCloud cloud = load_point_cloud(points_path, img0);
  if (cloud.rejected_lines > 0)
    std::cerr << "warning: rejected " << cloud.rejected_lines << " point lines\n";

  const OptimizerConfig cfg = to_config(flags);
  KeyframeBundle bundle = make_bundle(img0, img1, calib.K0, calib.K1, calib.extrinsics,
                                      std::move(cloud.points), cfg.levels);

  double s0 = flags.init_scale;
  if (flags.init_from_matching) {
    MatchConfig mc;
    s0 = scale_from_block_matching(img0, img1, bundle.points, calib.extrinsics, calib.K1.fx, mc,
                                   nullptr);
    std::cerr << "init from matching: s0 = " << s0 << "\n";
  }

  const double t0 = now_ms();
  const ScaleResult res = optimize_scale(bundle, s0, cfg);
  const double wall = now_ms() - t0;

  std::cout << "scale " << std::setprecision(12) << res.scale << "\n";
  std::cerr << "converged=" << (res.converged ? "yes" : "no")
            << " valid_fraction=" << res.valid_fraction << " wall_ms=" << wall << "\n";

  if (!flags.report_path.empty()) {
    json keyframe = result_to_json(res, bundle.points.size());
    keyframe["wall_ms"] = wall;
    write_json(json{{"schema", "scale_opt/report/1"},
                    {"command", "optimize"},
                    {"config",
                     {{"levels", cfg.levels},
                      {"tol", cfg.convergence_tol},
                      {"max_iterations_per_level", cfg.max_iterations_per_level},
                      {"huber_gamma", cfg.huber_gamma},
                      {"min_valid_points", cfg.min_valid_points},
                      {"min_valid_fraction", cfg.min_valid_fraction},
                      {"weighting", flags.weighting},
                      {"init_scale", s0}}},
                    {"keyframes", json::array({keyframe})},
                    {"timing", timing_to_json(TimingStats{wall, wall, wall})}},
               flags.report_path);
  }
  if (!res.converged) {
    std::cerr << "error: optimizer did not converge\n";
    return kExitAlgorithm;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// compare

void write_energy_svg(const BruteForceResult& bf, double s_true, const std::string& path) {
  const int W = 720, H = 420, ml = 60, mb = 40, mt = 20, mr = 20;
  double e_max = 0.0;
  for (double e : bf.energies)
    if (std::isfinite(e)) e_max = std::max(e_max, e);
  if (e_max <= 0.0) e_max = 1.0;
  const double lx0 = std::log(bf.scales.front()), lx1 = std::log(bf.scales.back());
  const auto X = [&](double s) {
    return ml + (std::log(s) - lx0) / (lx1 - lx0) * (W - ml - mr);
  };
  const auto Y = [&](double e) { return H - mb - e / e_max * (H - mb - mt); };

  std::ofstream out(path);
  if (!out) throw ParseError(path, "cannot open file for writing");
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n"
      << "<rect width='100%' height='100%' fill='white'/>\n"
      << "<line x1='" << ml << "' y1='" << H - mb << "' x2='" << W - mr << "' y2='" << H - mb
      << "' stroke='black'/>\n"
      << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << H - mb
      << "' stroke='black'/>\n";
  out << "<polyline fill='none' stroke='steelblue' stroke-width='1' points='";
  for (std::size_t i = 0; i < bf.scales.size(); ++i)
    if (std::isfinite(bf.energies[i])) out << X(bf.scales[i]) << "," << Y(bf.energies[i]) << " ";
  out << "'/>\n";
  out << "<line x1='" << X(s_true) << "' y1='" << mt << "' x2='" << X(s_true) << "' y2='"
      << H - mb << "' stroke='tomato' stroke-dasharray='4'/>\n";
  out << "<line x1='" << X(bf.best_scale) << "' y1='" << mt << "' x2='" << X(bf.best_scale)
      << "' y2='" << H - mb << "' stroke='seagreen' stroke-dasharray='2'/>\n";
  out << "<text x='" << W / 2 << "' y='" << H - 8 << "' font-size='13'>scale (log)</text>\n"
      << "<text x='8' y='" << H / 2 << "' font-size='13' transform='rotate(-90 14 " << H / 2
      << ")'>E_scale</text>\n</svg>\n";
}

int cmd_compare(const std::string& scene_dir, const OptimizeFlags& flags, int search_max,
                int patch_radius, const std::string& metric, const std::string& plot_path) {
  LoadedScene loaded = load_scene_dir(scene_dir, false);
  const SyntheticScene& scene = loaded.scene;
  const OptimizerConfig cfg = to_config(flags);
  KeyframeBundle bundle = make_bundle(scene.img0, scene.img1, scene.intrinsics, scene.intrinsics,
                                      scene.extrinsics, loaded.points, cfg.levels);

  json rows = json::array();

  {
    const double t0 = now_ms();
    json row{{"method", "scale-opt"}};
    try {
      const ScaleResult res = optimize_scale(bundle, flags.init_scale, cfg);
      row["scale"] = res.scale;
      row["scale_error_pct"] = 100.0 * std::abs(res.scale - scene.s_true) / scene.s_true;
      row["rejected_fraction"] = 1.0 - res.valid_fraction;
      row["converged"] = res.converged;
      row["error"] = nullptr;
    } catch (const OptimizationError& e) {
      row["scale"] = nullptr;
      row["error"] = e.what();
    }
    row["wall_ms"] = now_ms() - t0;
    rows.push_back(row);
  }

  {
    MatchConfig mc;
    mc.search_max = search_max;
    mc.patch_radius = patch_radius;
    mc.metric = metric == "ssd" ? MatchMetric::ssd : MatchMetric::ncc;
    const double t0 = now_ms();
    json row{{"method", "block-match"}};
    double rejected = 0.0;
    try {
      const double s = scale_from_block_matching(scene.img0, scene.img1, bundle.points,
                                                 scene.extrinsics, scene.intrinsics.fx, mc,
                                                 &rejected);
      row["scale"] = s;
      row["scale_error_pct"] = 100.0 * std::abs(s - scene.s_true) / scene.s_true;
      row["error"] = nullptr;
    } catch (const OptimizationError& e) {
      row["scale"] = nullptr;
      row["error"] = e.what();
    }
    row["rejected_fraction"] = rejected;
    row["wall_ms"] = now_ms() - t0;
    rows.push_back(row);
  }

  if (!plot_path.empty()) {
    const auto bf = brute_force_scale(bundle, scene.s_true / 4.0, scene.s_true * 4.0, 2000, cfg);
    write_energy_svg(bf, scene.s_true, plot_path);
  }

  const json report{
      {"schema", "scale_opt/compare/1"}, {"s_true", scene.s_true}, {"rows", rows}};
  std::cout << report.dump(2) << "\n";
  if (!flags.report_path.empty()) write_json(report, flags.report_path);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval

int cmd_eval(const std::string& gt_path, const std::string& est_path,
             const std::string& lengths_arg, const std::string& scales_arg,
             const std::string& keyframes_arg, const std::string& csv_path) {
  const auto gt = load_trajectory(gt_path);
  auto est = load_trajectory(est_path);

  std::vector<double> lengths;
  if (lengths_arg.empty())
    for (int l = 100; l <= 800; l += 100) lengths.push_back(l);
  else
    lengths = parse_value_list(lengths_arg, "lengths");

  if (!scales_arg.empty()) {
    const auto scales = parse_value_list(scales_arg, "scales");
    std::vector<int> keyframes;
    if (keyframes_arg.empty()) {
      keyframes.push_back(0);  // single global scale
    } else {
      for (double k : parse_value_list(keyframes_arg, "keyframes"))
        keyframes.push_back(static_cast<int>(k));
    }
    est = apply_scale_correction(est, scales, keyframes);
  }

  const EvalReport report = relative_errors(gt, est, lengths);
  std::ostringstream csv;
  csv << "# schema: scale_opt/eval/1\n";
  csv << "length_m,t_rel_pct,r_rel_deg_per_100m,segments\n";
  char buf[160];
  for (const auto& e : report.per_length) {
    std::snprintf(buf, sizeof(buf), "%g,%.9g,%.9g,%d\n", e.length, e.translational_pct,
                  e.rotational_deg_per_100m, e.segment_count);
    csv << buf;
  }
  std::snprintf(buf, sizeof(buf), "overall,%.9g,%.9g,%d\n", report.overall.translational_pct,
                report.overall.rotational_deg_per_100m, report.overall.segment_count);
  csv << buf;
  std::cout << csv.str();
  if (!csv_path.empty()) {
    std::ofstream out(csv_path);
    if (!out) throw ParseError(csv_path, "cannot open file for writing");
    out << csv.str();
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// bench

int cmd_bench(const std::string& scene_dir, int points_requested, int repeat,
              const OptimizeFlags& flags, double budget_ms) {
  LoadedScene loaded = load_scene_dir(scene_dir, true);
  const SyntheticScene& scene = loaded.scene;

  const auto run_at = [&](int n, int levels, double s0, int reps, json* out_row) {
    OptimizerConfig cfg = to_config(flags);
    cfg.levels = levels;
    const auto pts = sample_points(scene, n, 0.0, scene.seed + 17);
    KeyframeBundle bundle = make_bundle(scene.img0, scene.img1, scene.intrinsics,
                                        scene.intrinsics, scene.extrinsics, pts, levels);
    // Untimed warmup touches every page first.
    ScaleResult res = optimize_scale(bundle, s0, cfg);
    std::vector<double> samples(static_cast<std::size_t>(reps));
    for (auto& sample : samples) {
      const double t0 = now_ms();
      res = optimize_scale(bundle, s0, cfg);
      sample = now_ms() - t0;
    }
    const TimingStats t = timing_stats(samples);
    if (out_row)
      *out_row = json{{"points", n},
                      {"levels", levels},
                      {"init_scale", s0},
                      {"repeat", reps},
                      {"scale", res.scale},
                      {"converged", res.converged},
                      {"timing", timing_to_json(t)}};
    return t;
  };

  // Budget check: the full cold-start optimization at the requested size.
  json main_row;
  const TimingStats main_t =
      run_at(points_requested, flags.levels, flags.init_scale, repeat, &main_row);
  const bool pass = main_t.median <= budget_ms;
  std::cout << (pass ? "PASS" : "FAIL") << " budget: median " << main_t.median << " ms ("
            << points_requested << " points, " << flags.levels << " levels, budget " << budget_ms
            << " ms)\n";

  // Point-count scaling at a warm start (the steady-state keyframe regime):
  // the iteration path is then identical across counts, so the table
  // isolates the per-point cost.
  const int scale_reps = std::max(15, repeat);
  json table = json::array();
  for (int n : {500, 1000, 2000, 4000}) {
    json row;
    run_at(n, flags.levels, scene.s_true, scale_reps, &row);
    table.push_back(row);
    std::cout << "  " << n << " points (warm): median "
              << row["timing"]["median_ms"].get<double>() << " ms\n";
  }

  // Level scaling at the cold start: coarse-to-fine hands finer levels a
  // near-converged scale, so cost grows sub-linearly with the level count.
  json levels_table = json::array();
  for (int L : {1, 2, 4}) {
    json row;
    run_at(points_requested, L, flags.init_scale, std::max(9, repeat / 2), &row);
    levels_table.push_back(row);
    std::cout << "  " << L << " level(s) (cold): median "
              << row["timing"]["median_ms"].get<double>() << " ms\n";
  }

  const json report{{"schema", "scale_opt/bench/1"},
                    {"command", "bench"},
                    {"budget_ms", budget_ms},
                    {"budget_pass", pass},
                    {"threads", num_threads()},
                    {"main", main_row},
                    {"scaling_table", table},
                    {"levels_table", levels_table}};
  if (!flags.report_path.empty()) write_json(report, flags.report_path);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Direct photometric scale optimization for stereo pairs"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Cap library parallelism (default: SCALE_OPT_THREADS or 1)");

  // synth
  auto* synth = app.add_subcommand("synth", "Render a ground-truth stereo scene to a directory");
  std::string synth_config, synth_out;
  synth->add_option("config", synth_config, "Scene config JSON")->required();
  synth->add_option("--out", synth_out, "Output directory")->required();

  // optimize
  auto* optimize = app.add_subcommand("optimize", "Recover the scale of a point cloud");
  std::string opt_calib, opt_img0, opt_img1, opt_points;
  OptimizeFlags opt_flags;
  optimize->add_option("calib", opt_calib, "KITTI calib.txt or scene.json")->required();
  optimize->add_option("img0", opt_img0, "Reference image (PGM/PNG)")->required();
  optimize->add_option("img1", opt_img1, "Second stereo image")->required();
  optimize->add_option("points", opt_points, "Point cloud CSV (u,v,inv_depth)")->required();
  optimize->add_option("--init-scale", opt_flags.init_scale, "Initial scale");
  optimize->add_flag("--init-from-matching", opt_flags.init_from_matching,
                     "Initialize from the block-matching baseline");
  optimize->add_option("--levels", opt_flags.levels, "Pyramid levels");
  optimize->add_option("--tol", opt_flags.tol, "Relative convergence tolerance");
  optimize->add_option("--max-iterations", opt_flags.max_iterations, "Iterations per level");
  optimize->add_option("--huber-gamma", opt_flags.huber_gamma, "Huber threshold (intensity)");
  optimize->add_option("--min-valid-points", opt_flags.min_valid_points, "Overlap threshold");
  optimize->add_option("--min-valid-fraction", opt_flags.min_valid_fraction,
                       "Convergence overlap fraction");
  optimize->add_option("--weighting", opt_flags.weighting, "constant | gradient")
      ->check(CLI::IsMember({"constant", "gradient"}));
  optimize->add_option("--report", opt_flags.report_path, "Write a JSON run report");

  // compare
  auto* compare = app.add_subcommand("compare", "Scale optimization vs block matching");
  std::string cmp_scene, cmp_metric = "ncc", cmp_plot;
  OptimizeFlags cmp_flags;
  int cmp_search_max = 96, cmp_patch_radius = 3;
  compare->add_option("scene", cmp_scene, "Scene directory from synth")->required();
  compare->add_option("--init-scale", cmp_flags.init_scale, "Initial scale");
  compare->add_option("--levels", cmp_flags.levels, "Pyramid levels");
  compare->add_option("--search-max", cmp_search_max, "Max disparity (px)");
  compare->add_option("--patch-radius", cmp_patch_radius, "Matching patch radius");
  compare->add_option("--metric", cmp_metric, "ncc | ssd")
      ->check(CLI::IsMember({"ncc", "ssd"}));
  compare->add_option("--plot", cmp_plot, "Write the energy curve as SVG");
  compare->add_option("--report", cmp_flags.report_path, "Write the table as JSON");

  // eval
  auto* eval = app.add_subcommand("eval", "KITTI-style relative trajectory errors");
  std::string eval_gt, eval_est, eval_lengths, eval_scales, eval_keyframes, eval_csv;
  eval->add_option("gt", eval_gt, "Ground-truth poses (12 floats per line)")->required();
  eval->add_option("est", eval_est, "Estimated poses")->required();
  eval->add_option("--lengths", eval_lengths, "Comma list or @file (default 100,...,800)");
  eval->add_option("--scales", eval_scales, "Per-keyframe scales (comma list or @file)");
  eval->add_option("--keyframes", eval_keyframes, "Keyframe indices for --scales");
  eval->add_option("--csv", eval_csv, "Also write the CSV to a file");

  // bench
  auto* bench = app.add_subcommand("bench", "Per-keyframe optimizer timing");
  std::string bench_scene;
  OptimizeFlags bench_flags;
  int bench_points = 2000, bench_repeat = 20;
  double bench_budget = 30.0;
  bench->add_option("scene", bench_scene, "Scene directory from synth")->required();
  bench->add_option("--points", bench_points, "Point count for the budget check");
  bench->add_option("--repeat", bench_repeat, "Timed repetitions");
  bench->add_option("--levels", bench_flags.levels, "Pyramid levels");
  bench->add_option("--init-scale", bench_flags.init_scale, "Initial scale");
  bench->add_option("--budget-ms", bench_budget, "Median budget for the pass/fail line");
  bench->add_option("--report", bench_flags.report_path, "Write a JSON report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  set_num_threads(threads);
  try {
    if (*synth) return cmd_synth(synth_config, synth_out);
    if (*optimize) return cmd_optimize(opt_calib, opt_img0, opt_img1, opt_points, opt_flags);
    if (*compare)
      return cmd_compare(cmp_scene, cmp_flags, cmp_search_max, cmp_patch_radius, cmp_metric,
                         cmp_plot);
    if (*eval) return cmd_eval(eval_gt, eval_est, eval_lengths, eval_scales, eval_keyframes,
                               eval_csv);
    if (*bench) return cmd_bench(bench_scene, bench_points, bench_repeat, bench_flags,
                                 bench_budget);
  } catch (const OptimizationError& e) {
    std::cerr << "error (" << OptimizationError::kind_name(e.kind()) << "): " << e.what() << "\n";
    return kExitAlgorithm;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
