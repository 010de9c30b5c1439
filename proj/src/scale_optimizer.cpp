#include "scaleopt/scale_optimizer.hpp"

#include <cmath>
#include <limits>

#include "scaleopt/parallel.hpp"

namespace scaleopt {

void KeyframeBundle::validate() const {
  if (pyr0.num_levels() == 0 || pyr1.num_levels() == 0)
    throw ConfigError("bundle: empty pyramid");
  if (pyr0.num_levels() != pyr1.num_levels())
    throw ConfigError("bundle: pyramids must share the level count");
  extrinsics.validate();
  if (points.empty()) throw ConfigError("bundle: point set is empty");
  const GrayImage& img0 = pyr0.level(0);
  for (const ScalePoint& pt : points) {
    if (!(pt.inv_depth > 0.0) || !std::isfinite(pt.inv_depth))
      throw ConfigError("bundle: point inverse depth must be positive and finite");
    if (!pt.host_pixel.allFinite() || pt.host_pixel.x() < 0.0 || pt.host_pixel.y() < 0.0 ||
        pt.host_pixel.x() > img0.width - 1 || pt.host_pixel.y() > img0.height - 1)
      throw ConfigError("bundle: host pixel outside level-0 image bounds");
  }
}

KeyframeBundle make_bundle(const GrayImage& img0, const GrayImage& img1,
                           const CameraIntrinsics& K0, const CameraIntrinsics& K1,
                           const StereoExtrinsics& extrinsics,
                           std::vector<ScalePoint> points, int levels) {
  KeyframeBundle bundle;
  bundle.pyr0 = build_pyramid(img0, K0, levels);
  bundle.pyr1 = build_pyramid(img1, K1, levels);
  bundle.extrinsics = extrinsics;
  bundle.points = std::move(points);
  bundle.validate();
  return bundle;
}

void OptimizerConfig::validate() const {
  if (levels < 1) throw ConfigError("config: levels must be >= 1");
  if (max_iterations_per_level < 1) throw ConfigError("config: max iterations must be >= 1");
  if (!(convergence_tol > 0.0)) throw ConfigError("config: tolerance must be positive");
  if (!(huber_gamma > 0.0)) throw ConfigError("config: huber gamma must be positive");
  if (min_valid_points < 1) throw ConfigError("config: min valid points must be >= 1");
  if (!(min_valid_fraction > 0.0)) throw ConfigError("config: min valid fraction must be positive");
  if (!(constant_weight > 0.0) || !(gradient_weight_c > 0.0))
    throw ConfigError("config: point weights must be positive");
}

double huber_energy(double r, double gamma) {
  const double a = std::abs(r);
  return a <= gamma ? r * r : gamma * (2.0 * a - gamma);
}

double huber_weight(double r, double gamma) {
  const double a = std::abs(r);
  return a <= gamma ? 1.0 : gamma / a;
}

namespace {

// Per-bundle state that is constant over scale iterations: the rotated
// point R * Pi0^-1(p, d_p) and the point weight w_p.
struct WorkSet {
  std::vector<Point3> rotated;
  std::vector<Pixel> host_pixels;
  std::vector<double> point_weight;

  // Per-level host data, rebuilt whenever the level changes.
  std::vector<double> host_intensity;
  std::vector<unsigned char> host_valid;
  int current_level = -1;
};

double point_weight(const ScalePoint& pt, const KeyframeBundle& bundle,
                    const OptimizerConfig& cfg) {
  if (cfg.weight_mode == PointWeightMode::constant) return cfg.constant_weight;
  const auto g = gradient_bilinear(bundle.pyr0.level(0), pt.host_pixel);
  if (!g) return cfg.constant_weight;  // border host point, fall back
  const double c2 = cfg.gradient_weight_c * cfg.gradient_weight_c;
  return c2 / (c2 + g->squaredNorm());
}

WorkSet build_work_set(const KeyframeBundle& bundle, const OptimizerConfig& cfg) {
  WorkSet w;
  const std::size_t n = bundle.points.size();
  w.rotated.resize(n);
  w.host_pixels.resize(n);
  w.point_weight.resize(n);
  w.host_intensity.resize(n);
  w.host_valid.resize(n);
  const CameraIntrinsics& K0 = bundle.pyr0.K(0);
  for (std::size_t i = 0; i < n; ++i) {
    const ScalePoint& pt = bundle.points[i];
    w.rotated[i] = bundle.extrinsics.rotation * back_project(pt.host_pixel, pt.inv_depth, K0);
    w.host_pixels[i] = pt.host_pixel;
    w.point_weight[i] = point_weight(pt, bundle, cfg);
  }
  return w;
}

// Host intensities are re-sampled from pyr0 at each level so the residual
// stays consistent with the level's blur.
void set_level(WorkSet& w, const KeyframeBundle& bundle, int level) {
  if (w.current_level == level) return;
  const GrayImage& img0 = bundle.pyr0.level(level);
  for (std::size_t i = 0; i < w.host_pixels.size(); ++i) {
    const Pixel pl = pixel_at_level(w.host_pixels[i], level);
    if (in_interior(img0, pl)) {
      w.host_intensity[i] = *sample_bilinear(img0, pl);
      w.host_valid[i] = 1;
    } else {
      w.host_valid[i] = 0;
    }
  }
  w.current_level = level;
}

struct Accum {
  double energy = 0.0;
  double hessian = 0.0;   // sum w J^2
  double gradient = 0.0;  // sum w J r
  int count = 0;
};

Accum accumulate(const WorkSet& w, const KeyframeBundle& bundle, double s, int level,
                 const OptimizerConfig& cfg, bool with_jacobian) {
  const GrayImage& img1 = bundle.pyr1.level(level);
  const CameraIntrinsics K1 = bundle.pyr1.K(level);
  const Eigen::Vector3d t = bundle.extrinsics.translation;
  const double gamma = cfg.huber_gamma;
  const std::size_t n = w.rotated.size();

  std::vector<Accum> partial((n + kChunkSize - 1) / kChunkSize);
  parallel_chunks(n, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    Accum acc;
    for (std::size_t i = begin; i < end; ++i) {
      if (!w.host_valid[i]) continue;
      const Point3& xp = w.rotated[i];
      const double denom = s * xp.z() + t.z();
      if (!(denom > kMinDepth)) continue;
      const Pixel proj{(s * K1.fx * xp.x() + K1.fx * t.x()) / denom + K1.cx,
                       (s * K1.fy * xp.y() + K1.fy * t.y()) / denom + K1.cy};
      if (!in_interior(img1, proj)) continue;
      const double r = *sample_bilinear(img1, proj) - w.host_intensity[i];
      const double wp = w.point_weight[i];
      acc.energy += wp * huber_energy(r, gamma);
      acc.count += 1;
      if (with_jacobian) {
        const Eigen::Vector2d g = *gradient_bilinear(img1, proj);
        const double inv_d2 = 1.0 / (denom * denom);
        const double ju = inv_d2 * (K1.fx * xp.x() * t.z() - K1.fx * xp.z() * t.x());
        const double jv = inv_d2 * (K1.fy * xp.y() * t.z() - K1.fy * xp.z() * t.y());
        const double J = g.x() * ju + g.y() * jv;
        const double irls = wp * huber_weight(r, gamma);
        acc.hessian += irls * J * J;
        acc.gradient += irls * J * r;
      }
    }
    partial[chunk] = acc;
  });

  Accum total;
  for (const Accum& acc : partial) {
    total.energy += acc.energy;
    total.hessian += acc.hessian;
    total.gradient += acc.gradient;
    total.count += acc.count;
  }
  return total;
}

constexpr double kMinHessian = 1e-12;
constexpr int kMaxHalvings = 8;

[[noreturn]] void throw_insufficient(int count, int level) {
  throw OptimizationError(
      OptimizationError::Kind::insufficient_overlap,
      "insufficient overlap: " + std::to_string(count) + " valid points at level " +
          std::to_string(level));
}

}  // namespace

std::optional<double> residual(const ScalePoint& point, double s,
                               const KeyframeBundle& bundle, int level) {
  if (!(s > 0.0)) throw ConfigError("residual: scale must be positive");
  const GrayImage& img0 = bundle.pyr0.level(level);
  const GrayImage& img1 = bundle.pyr1.level(level);
  const Pixel pl = pixel_at_level(point.host_pixel, level);
  if (!in_interior(img0, pl)) return std::nullopt;
  const Point3 rotated =
      bundle.extrinsics.rotation * back_project(point.host_pixel, point.inv_depth, bundle.pyr0.K(0));
  const auto proj = project_rotated(rotated, s, bundle.extrinsics.translation, bundle.pyr1.K(level));
  if (!proj || !in_interior(img1, *proj)) return std::nullopt;
  return *sample_bilinear(img1, *proj) - *sample_bilinear(img0, pl);
}

std::pair<double, int> energy(const KeyframeBundle& bundle, double s, int level,
                              const OptimizerConfig& cfg) {
  if (!(s > 0.0)) throw ConfigError("energy: scale must be positive");
  cfg.validate();
  WorkSet w = build_work_set(bundle, cfg);
  set_level(w, bundle, level);
  const Accum acc = accumulate(w, bundle, s, level, cfg, false);
  if (acc.count < cfg.min_valid_points) throw_insufficient(acc.count, level);
  return {acc.energy, acc.count};
}

double gn_step(const KeyframeBundle& bundle, double s, int level, const OptimizerConfig& cfg) {
  if (!(s > 0.0)) throw ConfigError("gn_step: scale must be positive");
  cfg.validate();
  WorkSet w = build_work_set(bundle, cfg);
  set_level(w, bundle, level);
  const Accum acc = accumulate(w, bundle, s, level, cfg, true);
  if (acc.count < cfg.min_valid_points) throw_insufficient(acc.count, level);
  if (acc.hessian < kMinHessian)
    throw OptimizationError(OptimizationError::Kind::degenerate_normal_equation,
                            "degenerate normal equation: textureless or baseline-degenerate scene");
  return -acc.gradient / acc.hessian;
}

ScaleResult optimize_scale(const KeyframeBundle& bundle, double s0, const OptimizerConfig& cfg) {
  if (!(s0 > 0.0) || !std::isfinite(s0))
    throw ConfigError("optimize_scale: initial scale must be positive and finite");
  cfg.validate();
  bundle.validate();
  if (cfg.levels > bundle.pyr0.num_levels())
    throw ConfigError("optimize_scale: config requests more levels than the pyramids hold");
  if (s0 < kScaleBoxMin || s0 > kScaleBoxMax)
    throw OptimizationError(OptimizationError::Kind::scale_out_of_bounds,
                            "initial scale outside [1e-4, 1e4]");

  WorkSet work = build_work_set(bundle, cfg);
  const int n_points = static_cast<int>(bundle.points.size());

  ScaleResult result;
  result.initial_scale = s0;
  double s = s0;
  bool any_level_usable = false;
  bool any_degenerate = false;
  int finest_count = 0;

  for (int level = cfg.levels - 1; level >= 0; --level) {
    set_level(work, bundle, level);
    Accum acc = accumulate(work, bundle, s, level, cfg, true);

    LevelTrace trace;
    trace.level = level;
    trace.valid_count = acc.count;
    trace.final_energy = acc.energy;

    if (acc.count < cfg.min_valid_points) {
      if (level == 0) finest_count = acc.count;
      result.trace.push_back(std::move(trace));
      continue;  // level unusable, keep the current scale
    }
    trace.iteration_energies.push_back(acc.energy);

    bool level_usable = false;
    for (int iter = 0; iter < cfg.max_iterations_per_level; ++iter) {
      if (acc.hessian < kMinHessian) {
        any_degenerate = any_degenerate || !level_usable;
        break;
      }
      level_usable = true;
      const double s_inc = -acc.gradient / acc.hessian;
      if (std::abs(s_inc) / s < cfg.convergence_tol) {
        trace.reached_tolerance = true;
        break;
      }
      if (s + s_inc < kScaleBoxMin || s + s_inc > kScaleBoxMax)
        throw OptimizationError(OptimizationError::Kind::scale_out_of_bounds,
                                "scale iterate left [1e-4, 1e4]; inputs are inconsistent");

      // Plain GN step, halved up to 8 times while the energy increases.
      double step = s_inc;
      bool accepted = false;
      for (int h = 0; h <= kMaxHalvings; ++h) {
        const double s_try = s + step;
        const Accum trial = accumulate(work, bundle, s_try, level, cfg, true);
        if (trial.count >= cfg.min_valid_points && trial.energy <= acc.energy) {
          s = s_try;
          acc = trial;
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) break;  // no energy-decreasing step at this level
      trace.iterations += 1;
      trace.iteration_energies.push_back(acc.energy);
      if (std::abs(step) / s < cfg.convergence_tol) {
        trace.reached_tolerance = true;
        break;
      }
    }

    trace.final_energy = acc.energy;
    trace.valid_count = acc.count;
    if (level == 0) finest_count = acc.count;
    any_level_usable = any_level_usable || level_usable || trace.reached_tolerance;
    result.trace.push_back(std::move(trace));
  }

  if (!any_level_usable) {
    if (any_degenerate)
      throw OptimizationError(OptimizationError::Kind::degenerate_normal_equation,
                              "degenerate normal equation at every usable level");
    throw OptimizationError(OptimizationError::Kind::insufficient_overlap,
                            "scale optimization failed: insufficient overlap at every level");
  }

  result.scale = s;
  result.valid_fraction = n_points > 0 ? double(finest_count) / double(n_points) : 0.0;
  const LevelTrace& finest = result.trace.back();
  result.converged = finest.level == 0 && finest.reached_tolerance &&
                     result.valid_fraction >= cfg.min_valid_fraction;
  return result;
}

}  // namespace scaleopt
