#include <doctest.h>

#include <Eigen/Geometry>
#include <random>
#include <scaleopt/geometry.hpp>

using namespace scaleopt;

namespace {

CameraIntrinsics make_K(double fx = 450, double fy = 455, double cx = 320, double cy = 240,
                        int w = 640, int h = 480) {
  CameraIntrinsics K;
  K.fx = fx;
  K.fy = fy;
  K.cx = cx;
  K.cy = cy;
  K.width = w;
  K.height = h;
  return K;
}

Eigen::Matrix3d axis_angle(const Eigen::Vector3d& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

}  // namespace

TEST_CASE("back_project basics") {
  const auto K = make_K(400, 400, 320, 240);

  SUBCASE("principal ray at unit depth") {
    const Point3 X = back_project({320, 240}, 1.0, K);
    CHECK(X.isApprox(Point3(0, 0, 1), 1e-15));
  }
  SUBCASE("45 degree ray at depth 2") {
    const Point3 X = back_project({320 + 400, 240}, 0.5, K);
    CHECK(X.isApprox(Point3(2, 0, 2), 1e-15));
  }
  SUBCASE("z is exactly 1/inv_depth") {
    CHECK(back_project({12.5, 77.0}, 0.25, K).z() == 4.0);
  }
  SUBCASE("invalid depth") {
    CHECK_THROWS_AS(back_project({1, 1}, 0.0, K), ConfigError);
    CHECK_THROWS_AS(back_project({1, 1}, -0.3, K), ConfigError);
    CHECK_THROWS_AS(back_project({1, 1}, std::nan(""), K), ConfigError);
  }
}

TEST_CASE("project basics") {
  const auto K = make_K(400, 400, 320, 240);
  CHECK(project({0, 0, 5}, K) == Pixel(320, 240));
  CHECK(project({1, 0, 1}, K) == Pixel(720, 240));
  CHECK_THROWS_AS(project({0, 0, 0}, K), ConfigError);
  CHECK_THROWS_AS(project({0, 0, 1e-7}, K), ConfigError);
}

TEST_CASE("round trip: project(back_project(p, d)) = p") {
  const auto K = make_K();

  // The derived example, asserted through the round-trip oracle.
  {
    const Pixel p(100.5, 200.25);
    const Pixel q = project(back_project(p, 0.2, K), K);
    CHECK((q - p).cwiseAbs().maxCoeff() < 1e-9);
  }

  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> uu(0.0, 639.0), uv(0.0, 479.0), ud(0.01, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const Pixel p(uu(rng), uv(rng));
    const Pixel q = project(back_project(p, ud(rng), K), K);
    CHECK((q - p).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("projection is invariant to rescaling the point") {
  const auto K = make_K();
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> uc(-2.0, 2.0), uz(0.1, 20.0), us(0.01, 100.0);
  for (int i = 0; i < 1000; ++i) {
    const Point3 X(uc(rng), uc(rng), uz(rng));
    const double s = us(rng);
    const Pixel a = project(X, K);
    const Pixel b = project(Point3(s * X), K);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("monocular scale invariance: rescaling points and translation together") {
  // project(R*(s X) + s t) == project(R X + t), the scale blindness the
  // second camera is there to break.
  const auto K = make_K();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uc(-1.0, 1.0), uz(2.0, 20.0), us(0.1, 10.0),
      ua(-0.5, 0.5);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Matrix3d R = axis_angle({uc(rng), uc(rng), 1.0}, ua(rng));
    const Eigen::Vector3d t(uc(rng), uc(rng), uc(rng));
    const Point3 X(uc(rng), uc(rng), uz(rng));
    const Point3 Y = R * X + t;
    if (Y.z() < 0.5) continue;
    const double s = us(rng);
    const Pixel a = project(Y, K);
    const Pixel b = project(Point3(R * (s * X) + s * t), K);
    const double tol = 1e-12 * (1.0 + a.cwiseAbs().maxCoeff());
    CHECK((a - b).cwiseAbs().maxCoeff() < tol);
  }
}

TEST_CASE("project_scaled") {
  const auto K = make_K(400, 400, 320, 240);

  SUBCASE("rectified disparity f b / z") {
    const auto T = StereoExtrinsics::rectified(0.5);
    const auto proj = project_scaled({320, 240}, 1.0, 1.0, T, K, K);
    REQUIRE(proj.has_value());
    CHECK(proj->pixel.x() == doctest::Approx(320 - 200).epsilon(1e-12));
    CHECK(proj->pixel.y() == doctest::Approx(240).epsilon(1e-12));
  }

  SUBCASE("s -> infinity kills the baseline") {
    StereoExtrinsics T;
    T.rotation = axis_angle({0.3, 1.0, 0.1}, 0.05);
    T.translation = {-0.4, 0.02, 0.03};
    const Pixel p(350, 250);
    const auto proj = project_scaled(p, 0.25, 1e6, T, K, K);
    REQUIRE(proj.has_value());
    const Pixel limit = project(Point3(T.rotation * back_project(p, 0.25, K)), K);
    CHECK((proj->pixel - limit).norm() < 1e-3);
  }

  SUBCASE("matches the composed transform route") {
    StereoExtrinsics T;
    T.rotation = axis_angle({0.2, -0.5, 1.0}, 0.1);
    T.translation = {-0.4, 0.01, 0.02};
    const Pixel p(350, 250);
    const double d = 0.25, s = 1.7;
    const auto proj = project_scaled(p, d, s, T, K, K);
    REQUIRE(proj.has_value());
    // Independent composition with plain Eigen arithmetic.
    const Eigen::Vector3d ray((p.x() - K.cx) / K.fx, (p.y() - K.cy) / K.fy, 1.0);
    const Eigen::Vector3d X = T.rotation * (s * (ray / d)) + T.translation;
    const Pixel expected(K.fx * X.x() / X.z() + K.cx, K.fy * X.y() / X.z() + K.cy);
    CHECK((proj->pixel - expected).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(proj->rotated.isApprox(T.rotation * back_project(p, d, K), 1e-14));
  }

  SUBCASE("equals project with identity transform and s = 1") {
    StereoExtrinsics T;  // deliberately zero baseline; not validated here
    const Pixel p(123.25, 307.5);
    const auto proj = project_scaled(p, 0.4, 1.0, T, K, K);
    REQUIRE(proj.has_value());
    CHECK((proj->pixel - project(back_project(p, 0.4, K), K)).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("behind the camera is a skip signal, not an exception") {
    StereoExtrinsics T;
    T.translation = {0, 0, -3.0};  // forward baseline
    CHECK_FALSE(project_scaled({320, 240}, 1.0, 0.5, T, K, K).has_value());
    CHECK(project_scaled({320, 240}, 1.0, 4.0, T, K, K).has_value());
  }
}

TEST_CASE("jacobian_scale") {
  const auto K = make_K(400, 410, 320, 240);

  SUBCASE("rectified closed form (fx b / (s^2 z'), 0)") {
    const auto T = StereoExtrinsics::rectified(0.5);
    const Point3 rotated(0.3, -0.2, 4.0);
    const double s = 1.7;
    const Eigen::Vector2d J = jacobian_scale(rotated, s, T, K);
    CHECK(J.x() == doctest::Approx(K.fx * 0.5 / (s * s * rotated.z())).epsilon(1e-12));
    CHECK(J.y() == doctest::Approx(0.0));
  }

  SUBCASE("t parallel to the rotated point gives a zero jacobian") {
    StereoExtrinsics T;
    const Point3 rotated(0.4, -0.1, 3.0);
    T.translation = -0.2 * rotated;
    const Eigen::Vector2d J = jacobian_scale(rotated, 1.3, T, K);
    CHECK(J.norm() < 1e-12);
  }

  SUBCASE("matches central finite differences over 1000 random setups") {
    std::mt19937_64 rng(4321);
    std::uniform_real_distribution<double> uc(-1.0, 1.0), uz(1.0, 15.0), us(0.2, 5.0),
        ut(-0.6, 0.6), ua(-0.3, 0.3);
    int tested = 0;
    while (tested < 1000) {
      StereoExtrinsics T;
      T.rotation = axis_angle({uc(rng), uc(rng), 1.0}, ua(rng));
      T.translation = {ut(rng), ut(rng), ut(rng)};
      if (T.translation.norm() < 1e-3) continue;
      const Point3 rotated(uc(rng), uc(rng), uz(rng));
      const double s = us(rng);
      if (s * rotated.z() + T.translation.z() < 0.05) continue;

      const Eigen::Vector2d J = jacobian_scale(rotated, s, T, K);
      const double h = 1e-6;
      const auto lo = project_rotated(rotated, s - h, T.translation, K);
      const auto hi = project_rotated(rotated, s + h, T.translation, K);
      if (!lo || !hi) continue;
      const Eigen::Vector2d fd = (*hi - *lo) / (2.0 * h);
      const double denom = std::max(J.norm(), 1e-6);
      CHECK((J - fd).norm() / denom < 1e-4);
      ++tested;
    }
  }

  SUBCASE("degenerate geometry throws") {
    StereoExtrinsics T;
    T.translation = {0, 0, -2.0};
    CHECK_THROWS_AS(jacobian_scale({0, 0, 1.0}, 1.0, T, K), ConfigError);
  }
}

TEST_CASE("intrinsics and extrinsics validation") {
  CHECK_NOTHROW(make_K().validate());

  auto bad = make_K();
  bad.fx = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = make_K();
  bad.cx = 700;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  StereoExtrinsics T = StereoExtrinsics::rectified(0.5);
  CHECK_NOTHROW(T.validate());
  T.translation.setZero();
  CHECK_THROWS_AS(T.validate(), ConfigError);
  T = StereoExtrinsics::rectified(0.5);
  T.rotation(0, 0) = 1.1;
  CHECK_THROWS_AS(T.validate(), ConfigError);
  T.rotation = -Eigen::Matrix3d::Identity();  // orthonormal but det -1
  CHECK_THROWS_AS(T.validate(), ConfigError);
}

TEST_CASE("per-level intrinsics follow the pixel-center convention") {
  const auto K = make_K(400, 410, 319.5, 239.5, 640, 480);
  for (int l = 0; l < 4; ++l) {
    const auto Kl = K.at_level(l);
    const double f = double(1 << l);
    CHECK(Kl.fx == K.fx / f);
    CHECK(Kl.fy == K.fy / f);
    CHECK(Kl.cx == (K.cx + 0.5) / f - 0.5);
    CHECK(Kl.cy == (K.cy + 0.5) / f - 0.5);
    CHECK(Kl.width == 640 >> l);
    CHECK(Kl.height == 480 >> l);
    // The level ray through any pixel matches the level-0 ray.
    const double u0 = 123.0, ul = (u0 + 0.5) / f - 0.5;
    CHECK((ul - Kl.cx) / Kl.fx == doctest::Approx((u0 - K.cx) / K.fx).epsilon(1e-14));
  }
}
