#include <doctest.h>

#include <cstring>
#include <scaleopt/parallel.hpp>
#include <scaleopt/scale_optimizer.hpp>

#include "common/scenes.hpp"

using namespace scaleopt;
using namespace test_scenes;

namespace {

// Rendering is the slow part; share the standard bundle across cases.
const SyntheticScene& standard_scene() {
  static const SyntheticScene scene = render_scene(standard_plane_config());
  return scene;
}

const KeyframeBundle& shared_standard_bundle() {
  static const KeyframeBundle bundle =
      bundle_from_scene(standard_scene(), sample_points(standard_scene(), 2000, 0.0, 7), 4);
  return bundle;
}

// A 64x64 two-image rig with a pure horizontal ramp and known shift,
// small enough to reason about single residuals by hand.
struct TinyRig {
  GrayImage img0{64, 64};
  GrayImage img1{64, 64};
  CameraIntrinsics K;
  StereoExtrinsics T = StereoExtrinsics::rectified(0.5);

  TinyRig() {
    K.fx = 40;
    K.fy = 40;
    K.cx = 31.5;
    K.cy = 31.5;
    K.width = 64;
    K.height = 64;
    for (int v = 0; v < 64; ++v)
      for (int u = 0; u < 64; ++u) {
        img0.at(u, v) = 2.0 * u + 10.0;
        img1.at(u, v) = 2.0 * u + 10.0;
      }
  }

  KeyframeBundle bundle(std::vector<ScalePoint> pts, int levels = 1) const {
    return make_bundle(img0, img1, K, K, T, std::move(pts), levels);
  }
};

OptimizerConfig loose_config(int min_points = 1, int levels = 1) {
  OptimizerConfig cfg;
  cfg.levels = levels;
  cfg.min_valid_points = min_points;
  return cfg;
}

}  // namespace

TEST_CASE("huber energy and weight") {
  CHECK(huber_energy(0.0, 9.0) == 0.0);
  CHECK(huber_energy(9.0, 9.0) == 81.0);
  CHECK(huber_energy(-9.0, 9.0) == 81.0);
  CHECK(huber_energy(18.0, 9.0) == 9.0 * (36.0 - 9.0));
  CHECK(huber_energy(4.0, 9.0) == 16.0);

  // C1 continuity at the threshold.
  const double g = 9.0, eps = 1e-7;
  CHECK(huber_energy(g + eps, g) - huber_energy(g - eps, g) ==
        doctest::Approx(2.0 * g * 2.0 * eps).epsilon(1e-3));

  CHECK(huber_weight(3.0, 9.0) == 1.0);
  CHECK(huber_weight(-3.0, 9.0) == 1.0);
  CHECK(huber_weight(18.0, 9.0) == 0.5);
}

TEST_CASE("residual validity") {
  SUBCASE("99% of points fit to half an intensity unit at s_true") {
    const auto& bundle = shared_standard_bundle();
    int valid = 0, small = 0;
    for (const auto& pt : bundle.points) {
      const auto r = residual(pt, standard_scene().s_true, bundle, 0);
      if (!r) continue;
      ++valid;
      if (std::abs(*r) < 0.5) ++small;
    }
    CHECK(valid > 1500);
    CHECK(double(small) / double(valid) >= 0.99);
  }

  SUBCASE("projection outside img1 is invalid") {
    TinyRig rig;
    // Disparity fx*b*d/s = 40*0.5*2 = 40 px pushes u=20 far out of frame.
    auto bundle = rig.bundle({ScalePoint{{20, 32}, 2.0, rig.img0.at(20, 32)}});
    CHECK_FALSE(residual(bundle.points[0], 1.0, bundle, 0).has_value());
    // A deep point stays inside.
    bundle.points[0] = {{20, 32}, 0.05, rig.img0.at(20, 32)};
    CHECK(residual(bundle.points[0], 1.0, bundle, 0).has_value());
  }

  SUBCASE("behind a forward baseline is invalid") {
    TinyRig rig;
    rig.T.rotation.setIdentity();
    rig.T.translation = {0, 0, -2.0};
    const auto bundle = rig.bundle({ScalePoint{{31, 31}, 1.0, rig.img0.at(31, 31)}});
    // s z' + t_z = 0.5 - 2 < 0.
    CHECK_FALSE(residual(bundle.points[0], 0.5, bundle, 0).has_value());
    CHECK(residual(bundle.points[0], 4.0, bundle, 0).has_value());
  }

  SUBCASE("scale must be positive") {
    const auto& bundle = shared_standard_bundle();
    CHECK_THROWS_AS(residual(bundle.points[0], 0.0, bundle, 0), ConfigError);
  }
}

TEST_CASE("energy") {
  SUBCASE("single point sums to its huber energy") {
    TinyRig rig;
    const Pixel p(40, 32);
    const ScalePoint pt{p, 0.25, rig.img0.at(40, 32)};
    const auto bundle = rig.bundle({pt});
    const auto cfg = loose_config();
    const double s = 1.3;
    const auto r = residual(pt, s, bundle, 0);
    REQUIRE(r.has_value());
    const auto [E, count] = energy(bundle, s, 0, cfg);
    CHECK(count == 1);
    CHECK(E == huber_energy(*r, cfg.huber_gamma));
  }

  SUBCASE("true scale beats half and double") {
    const auto& bundle = shared_standard_bundle();
    OptimizerConfig cfg;
    const double st = standard_scene().s_true;
    const double e_true = energy(bundle, st, 0, cfg).first;
    CHECK(e_true < energy(bundle, 0.5 * st, 0, cfg).first);
    CHECK(e_true < energy(bundle, 2.0 * st, 0, cfg).first);
  }

  SUBCASE("insufficient overlap throws") {
    TinyRig rig;
    const auto bundle = rig.bundle({ScalePoint{{31, 31}, 1.0, rig.img0.at(31, 31)}});
    OptimizerConfig cfg;  // default min_valid_points = 50 > 1
    CHECK_THROWS_AS(energy(bundle, 1.0, 0, cfg), OptimizationError);
    try {
      energy(bundle, 1.0, 0, cfg);
    } catch (const OptimizationError& e) {
      CHECK(e.kind() == OptimizationError::Kind::insufficient_overlap);
    }
  }
}

TEST_CASE("gn_step") {
  SUBCASE("single point solves -r/J exactly") {
    TinyRig rig;
    // Shift img1 two pixels right so the residual is nonzero but small.
    for (int v = 0; v < 64; ++v)
      for (int u = 0; u < 64; ++u) rig.img1.at(u, v) = 2.0 * (u - 2.0) + 10.0;
    const Pixel p(40, 32);
    const ScalePoint pt{p, 0.25, rig.img0.at(40, 32)};
    const auto bundle = rig.bundle({pt});
    const auto cfg = loose_config();
    const double s = 1.1;

    const double r = *residual(pt, s, bundle, 0);
    const auto proj = project_scaled(p, pt.inv_depth, s, rig.T, rig.K, rig.K);
    REQUIRE(proj.has_value());
    const Eigen::Vector2d g = *gradient_bilinear(bundle.pyr1.level(0), proj->pixel);
    const double J = g.dot(jacobian_scale(proj->rotated, s, rig.T, rig.K));
    CHECK(gn_step(bundle, s, 0, cfg) == doctest::Approx(-r / J).epsilon(1e-12));
  }

  SUBCASE("zero numerator at the noiseless optimum") {
    const auto& bundle = shared_standard_bundle();
    OptimizerConfig cfg;
    CHECK(std::abs(gn_step(bundle, standard_scene().s_true, 0, cfg)) < 1e-9);
  }

  SUBCASE("step signs bracket the optimum") {
    const auto& bundle = shared_standard_bundle();
    OptimizerConfig cfg;
    const double st = standard_scene().s_true;
    CHECK(gn_step(bundle, 0.9 * st, 0, cfg) > 0.0);
    CHECK(gn_step(bundle, 1.1 * st, 0, cfg) < 0.0);
  }

  SUBCASE("constant images degenerate the normal equation") {
    TinyRig rig;
    rig.img0 = GrayImage(64, 64, 80.0);
    rig.img1 = GrayImage(64, 64, 80.0);
    std::vector<ScalePoint> pts;
    for (int i = 0; i < 60; ++i) pts.push_back({{20.0 + i / 8, 20.0 + i % 8}, 0.1, 80.0});
    const auto bundle = rig.bundle(pts);
    try {
      gn_step(bundle, 1.0, 0, loose_config(50));
      FAIL("expected degenerate normal equation");
    } catch (const OptimizationError& e) {
      CHECK(e.kind() == OptimizationError::Kind::degenerate_normal_equation);
    }
  }
}

TEST_CASE("optimize_scale on the standard scene") {
  const auto& bundle = shared_standard_bundle();
  OptimizerConfig cfg;
  const double st = standard_scene().s_true;

  SUBCASE("recovers s_true from a cold start") {
    const ScaleResult res = optimize_scale(bundle, 1.0, cfg);
    CHECK(res.converged);
    CHECK(std::abs(res.scale - st) / st < 0.01);
    CHECK(res.initial_scale == 1.0);
    CHECK(res.valid_fraction > 0.5);
    REQUIRE(res.trace.size() == 4);
    CHECK(res.trace.front().level == 3);
    CHECK(res.trace.back().level == 0);
  }

  SUBCASE("warm start converges within 2 finest-level iterations") {
    const ScaleResult res = optimize_scale(bundle, st, cfg);
    CHECK(res.converged);
    CHECK(std::abs(res.scale - st) / st < 1e-3);
    CHECK(res.trace.back().iterations <= 2);
  }

  SUBCASE("accepted iterations never increase the energy") {
    const ScaleResult res = optimize_scale(bundle, 1.0, cfg);
    for (const auto& level : res.trace)
      for (std::size_t i = 1; i < level.iteration_energies.size(); ++i)
        CHECK(level.iteration_energies[i] <= level.iteration_energies[i - 1]);
  }

  SUBCASE("fixed point condition at the returned scale") {
    const ScaleResult res = optimize_scale(bundle, 1.0, cfg);
    const double step = gn_step(bundle, res.scale, 0, cfg);
    CHECK(std::abs(step) < 10.0 * cfg.convergence_tol * res.scale);
  }

  SUBCASE("bit-identical across runs and thread counts") {
    set_num_threads(1);
    const ScaleResult a = optimize_scale(bundle, 1.0, cfg);
    const ScaleResult b = optimize_scale(bundle, 1.0, cfg);
    set_num_threads(3);
    const ScaleResult c = optimize_scale(bundle, 1.0, cfg);
    set_num_threads(1);
    CHECK(std::memcmp(&a.scale, &b.scale, sizeof(double)) == 0);
    CHECK(std::memcmp(&a.scale, &c.scale, sizeof(double)) == 0);
    REQUIRE(a.trace.size() == c.trace.size());
    for (std::size_t l = 0; l < a.trace.size(); ++l) {
      CHECK(a.trace[l].iterations == c.trace[l].iterations);
      CHECK(a.trace[l].final_energy == c.trace[l].final_energy);
    }
  }

  SUBCASE("gradient-weighted points also recover the scale") {
    OptimizerConfig wcfg;
    wcfg.weight_mode = PointWeightMode::gradient_weighted;
    const ScaleResult res = optimize_scale(bundle, 1.0, wcfg);
    CHECK(std::abs(res.scale - st) / st < 0.01);
  }
}

TEST_CASE("doubling inverse depths doubles the recovered scale") {
  const auto& scene = standard_scene();
  auto pts = sample_points(scene, 2000, 0.0, 7);
  OptimizerConfig cfg;
  const double s1 = optimize_scale(bundle_from_scene(scene, pts, 4), 1.0, cfg).scale;
  for (auto& p : pts) p.inv_depth *= 2.0;
  const double s2 = optimize_scale(bundle_from_scene(scene, pts, 4), 2.0, cfg).scale;
  CHECK(std::abs(s2 / s1 - 2.0) / 2.0 < 0.005);
}

TEST_CASE("pyramid necessity on the wide-basin scene") {
  const SceneConfig cfg = wide_basin_config();
  const SyntheticScene scene = render_scene(cfg);
  const auto pts = sample_points(scene, 2000, 0.0, 7);
  const double s0 = cfg.s_true / 3.0;

  OptimizerConfig four;
  four.levels = 4;
  const ScaleResult full = optimize_scale(bundle_from_scene(scene, pts, 4), s0, four);
  CHECK(std::abs(full.scale - cfg.s_true) / cfg.s_true < 0.01);

  OptimizerConfig one;
  one.levels = 1;
  bool single_failed = false;
  try {
    const ScaleResult flat = optimize_scale(bundle_from_scene(scene, pts, 1), s0, one);
    single_failed = !flat.converged || std::abs(flat.scale - cfg.s_true) / cfg.s_true > 0.05;
  } catch (const OptimizationError&) {
    single_failed = true;
  }
  CHECK(single_failed);
}

TEST_CASE("optimize_scale failure modes") {
  SUBCASE("constant images fail with a degenerate normal equation") {
    TinyRig rig;
    rig.img0 = GrayImage(64, 64, 80.0);
    rig.img1 = GrayImage(64, 64, 80.0);
    std::vector<ScalePoint> pts;
    for (int i = 0; i < 64; ++i) pts.push_back({{10.0 + i % 8, 10.0 + i / 8}, 0.2, 80.0});
    const auto bundle = rig.bundle(pts, 2);
    try {
      optimize_scale(bundle, 1.0, loose_config(50, 2));
      FAIL("expected degenerate normal equation");
    } catch (const OptimizationError& e) {
      CHECK(e.kind() == OptimizationError::Kind::degenerate_normal_equation);
    }
  }

  SUBCASE("no overlap at any level fails") {
    TinyRig rig;
    rig.T = StereoExtrinsics::rectified(50.0);  // absurd baseline, everything leaves img1
    std::vector<ScalePoint> pts;
    for (int i = 0; i < 64; ++i) pts.push_back({{10.0 + i % 8, 10.0 + i / 8}, 0.2, 80.0});
    const auto bundle = rig.bundle(pts, 2);
    CHECK_THROWS_AS(optimize_scale(bundle, 1.0, loose_config(50, 2)), OptimizationError);
  }

  SUBCASE("initial scale outside the box fails") {
    CHECK_THROWS_AS(optimize_scale(shared_standard_bundle(), 1e-5, OptimizerConfig{}),
                    OptimizationError);
    CHECK_THROWS_AS(optimize_scale(shared_standard_bundle(), 0.0, OptimizerConfig{}), ConfigError);
  }

  SUBCASE("config validation") {
    OptimizerConfig cfg;
    cfg.levels = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.huber_gamma = -1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.levels = 9;  // more levels than the pyramids hold
    CHECK_THROWS_AS(optimize_scale(shared_standard_bundle(), 1.0, cfg), ConfigError);
  }

  SUBCASE("bundle validation") {
    KeyframeBundle bundle;
    CHECK_THROWS_AS(bundle.validate(), ConfigError);
    bundle = shared_standard_bundle();
    bundle.points.clear();
    CHECK_THROWS_AS(bundle.validate(), ConfigError);
    bundle = shared_standard_bundle();
    bundle.points[0].inv_depth = -1.0;
    CHECK_THROWS_AS(bundle.validate(), ConfigError);
  }
}
