#include "scaleopt/synthetic.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "scaleopt/errors.hpp"

namespace scaleopt {

namespace {

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  return seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
}

// ---------------------------------------------------------------------------
// Geometry: every surface is a graph over (x, y), intersected per ray.

struct Ray {
  Eigen::Vector3d origin;
  Eigen::Vector3d dir;  // unnormalized, dir.z == 1 for camera 0
};

double height_at(const SceneConfig& cfg, double x, double y) {
  const double k = 2.0 * M_PI / cfg.field_period;
  return cfg.plane_depth + cfg.field_amplitude * std::sin(k * x) * std::cos(k * y);
}

double intersect(const SceneConfig& cfg, const Ray& ray) {
  double t = -1.0;
  switch (cfg.geometry) {
    case GeometryKind::fronto_plane: {
      if (std::abs(ray.dir.z()) < 1e-12) throw ConfigError("scene: ray parallel to plane");
      t = (cfg.plane_depth - ray.origin.z()) / ray.dir.z();
      break;
    }
    case GeometryKind::inclined_plane: {
      const double dn = cfg.plane_normal.dot(ray.dir);
      if (std::abs(dn) < 1e-12) throw ConfigError("scene: ray parallel to plane");
      t = (cfg.plane_offset - cfg.plane_normal.dot(ray.origin)) / dn;
      break;
    }
    case GeometryKind::height_field: {
      // g(t) = o_z + t d_z - h(x(t), y(t)) is monotone under the slope
      // bound checked in validate(); Newton from the mean plane, with a
      // bisection bracket as fallback.
      auto g = [&](double tt) {
        const Eigen::Vector3d X = ray.origin + tt * ray.dir;
        return X.z() - height_at(cfg, X.x(), X.y());
      };
      if (std::abs(ray.dir.z()) < 1e-12) throw ConfigError("scene: ray parallel to field");
      double lo = (cfg.plane_depth - cfg.field_amplitude - ray.origin.z()) / ray.dir.z();
      double hi = (cfg.plane_depth + cfg.field_amplitude - ray.origin.z()) / ray.dir.z();
      if (lo > hi) std::swap(lo, hi);
      t = 0.5 * (lo + hi);
      for (int it = 0; it < 16; ++it) {
        const double gt = g(t);
        const Eigen::Vector3d X = ray.origin + t * ray.dir;
        const double k = 2.0 * M_PI / cfg.field_period;
        const double hx = cfg.field_amplitude * k * std::cos(k * X.x()) * std::cos(k * X.y());
        const double hy = -cfg.field_amplitude * k * std::sin(k * X.x()) * std::sin(k * X.y());
        const double dg = ray.dir.z() - hx * ray.dir.x() - hy * ray.dir.y();
        const double step = gt / dg;
        t -= step;
        if (std::abs(step) < 1e-12) break;
        t = std::clamp(t, lo, hi);
      }
      if (std::abs(g(t)) > 1e-6) {  // Newton did not settle; bisect
        double a = lo, b = hi;
        double ga = g(a);
        for (int it = 0; it < 80; ++it) {
          t = 0.5 * (a + b);
          const double gm = g(t);
          if ((ga < 0) == (gm < 0)) {
            a = t;
            ga = gm;
          } else {
            b = t;
          }
        }
      }
      break;
    }
  }
  const Eigen::Vector3d X = ray.origin + t * ray.dir;
  if (!(t > 0.0) || !(X.z() > 0.0))
    throw ConfigError("scene: geometry behind camera along a rendered ray");
  return t;
}

// ---------------------------------------------------------------------------
// Texture: a continuous function over texture pixels (a, b); one texture
// pixel spans one image pixel at the reference depth.

class BandLimitedTexture {
 public:
  // Octave grids of box-blurred white noise at cell sizes 2, 8 and 32
  // texture pixels (features of roughly 10, 40 and 160 px). The finest
  // cell stays above one pixel so the texture survives 2x2 downsampling
  // without aliasing.
  // Coarse-dominant weights, roughly a natural-image spectrum; the coarse
  // octave carries the wide attraction basin for coarse-to-fine descent.
  static constexpr int kOctaves = 3;
  static constexpr double kCell[kOctaves] = {2.0, 8.0, 32.0};
  static constexpr double kWeight[kOctaves] = {0.35, 0.65, 1.0};

  BandLimitedTexture(double a_min, double a_max, double b_min, double b_max,
                     double contrast, std::uint64_t seed) {
    for (int o = 0; o < kOctaves; ++o) {
      const double margin = 4.0 * kCell[o];
      a0_[o] = std::floor((a_min - margin) / kCell[o]);
      b0_[o] = std::floor((b_min - margin) / kCell[o]);
      const int w = static_cast<int>(std::ceil((a_max + margin) / kCell[o]) - a0_[o]) + 2;
      const int h = static_cast<int>(std::ceil((b_max + margin) / kCell[o]) - b0_[o]) + 2;
      grid_[o] = blurred_noise(w, h, stream_seed(seed, 100 + o));
    }
    // Each 5x5 box-blurred U(0,1) grid has standard deviation ~ sqrt(1/12)/5;
    // scale the sum so its deviation is about half the requested contrast.
    const double octave_norm =
        std::sqrt(kWeight[0] * kWeight[0] + kWeight[1] * kWeight[1] + kWeight[2] * kWeight[2]);
    gain_ = 0.5 * contrast / (std::sqrt(1.0 / 12.0) / 5.0 * octave_norm);
  }

  double operator()(double a, double b) const {
    double v = 0.0;
    for (int o = 0; o < kOctaves; ++o)
      v += kWeight[o] * (bilinear(grid_[o], a / kCell[o] - a0_[o], b / kCell[o] - b0_[o]) - 0.5);
    return std::clamp(127.5 + gain_ * v, 0.0, 255.0);
  }

 private:
  static GrayImage blurred_noise(int w, int h, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    GrayImage raw(w, h), out(w, h);
    for (auto& v : raw.data) v = uni(rng);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double sum = 0.0;
        for (int dy = -2; dy <= 2; ++dy)
          for (int dx = -2; dx <= 2; ++dx) {
            const int xx = std::clamp(x + dx, 0, w - 1);
            const int yy = std::clamp(y + dy, 0, h - 1);
            sum += raw.at(xx, yy);
          }
        out.at(x, y) = sum / 25.0;
      }
    return out;
  }

  static double bilinear(const GrayImage& g, double x, double y) {
    x = std::clamp(x, 0.0, double(g.width - 1));
    y = std::clamp(y, 0.0, double(g.height - 1));
    const int i = std::min(static_cast<int>(x), g.width - 2);
    const int j = std::min(static_cast<int>(y), g.height - 2);
    const double fu = x - i, fv = y - j;
    return (1 - fu) * (1 - fv) * g.at(i, j) + fu * (1 - fv) * g.at(i + 1, j) +
           (1 - fu) * fv * g.at(i, j + 1) + fu * fv * g.at(i + 1, j + 1);
  }

  GrayImage grid_[kOctaves];
  double a0_[kOctaves] = {0, 0, 0};
  double b0_[kOctaves] = {0, 0, 0};
  double gain_ = 1.0;
};

class TextureSampler {
 public:
  TextureSampler(const SceneConfig& cfg, double a_min, double a_max, double b_min, double b_max)
      : cfg_(cfg) {
    if (cfg.texture == TextureKind::band_limited)
      band_.emplace(a_min, a_max, b_min, b_max, cfg.texture_contrast, cfg.seed);
  }

  double operator()(double a, double b) const {
    switch (cfg_.texture) {
      case TextureKind::band_limited:
        return (*band_)(a, b);
      case TextureKind::sinusoid: {
        const double p = cfg_.texture_period_px;
        return 127.5 + cfg_.texture_contrast * std::sin(2.0 * M_PI * a / p) *
                           std::cos(2.0 * M_PI * b / (3.0 * p));
      }
      case TextureKind::checkerboard: {
        const double tile = cfg_.texture_period_px / 2.0;
        const long pa = static_cast<long>(std::floor(a / tile));
        const long pb = static_cast<long>(std::floor(b / tile));
        return ((pa + pb) & 1) ? 127.5 + cfg_.texture_contrast : 127.5 - cfg_.texture_contrast;
      }
    }
    return 127.5;
  }

 private:
  const SceneConfig& cfg_;
  std::optional<BandLimitedTexture> band_;
};

}  // namespace

void SceneConfig::validate() const {
  intrinsics.validate();
  const Eigen::Matrix3d rtr = extrinsics.rotation.transpose() * extrinsics.rotation;
  if ((rtr - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-9 ||
      std::abs(extrinsics.rotation.determinant() - 1.0) > 1e-9)
    throw ConfigError("scene: rotation is not orthonormal");
  if (!(s_true > 0.0)) throw ConfigError("scene: s_true must be positive");
  if (noise_sigma < 0.0) throw ConfigError("scene: noise sigma must be non-negative");
  if (!(texture_contrast > 0.0) || texture_contrast > 127.0)
    throw ConfigError("scene: texture contrast must be in (0, 127]");
  if (texture != TextureKind::band_limited && texture_period_px < 2.0)
    throw ConfigError("scene: texture period must be at least 2 px");
  switch (geometry) {
    case GeometryKind::fronto_plane:
      if (!(plane_depth > 0.0)) throw ConfigError("scene: plane depth must be positive");
      break;
    case GeometryKind::inclined_plane: {
      if (plane_normal.norm() < 1e-9) throw ConfigError("scene: zero plane normal");
      if (!(plane_offset / plane_normal.normalized().z() > 0.0))
        throw ConfigError("scene: plane does not face the camera");
      break;
    }
    case GeometryKind::height_field: {
      if (!(plane_depth > 0.0) || !(field_period > 0.0) || field_amplitude < 0.0)
        throw ConfigError("scene: invalid height field parameters");
      // Keep the surface a gentle graph so every ray meets it exactly once.
      const double slope = field_amplitude * 2.0 * M_PI / field_period;
      const double ray_x = (intrinsics.width / 2.0 + 2.0) / intrinsics.fx;
      const double ray_y = (intrinsics.height / 2.0 + 2.0) / intrinsics.fy;
      if (slope * (ray_x + ray_y) >= 0.9)
        throw ConfigError("scene: height field too steep for unique ray intersections");
      break;
    }
  }
}

SyntheticScene render_scene(const SceneConfig& cfg) {
  cfg.validate();
  const CameraIntrinsics& K = cfg.intrinsics;
  const int w = K.width, h = K.height;

  const double z_ref = cfg.geometry == GeometryKind::inclined_plane
                           ? cfg.plane_offset / cfg.plane_normal.normalized().z()
                           : cfg.plane_depth;
  const double px_per_m = K.fx / z_ref;  // one texture px per image px at z_ref

  // Pass 1: intersect every ray of both cameras, collect texture coords.
  const Eigen::Matrix3d Rt = cfg.extrinsics.rotation.transpose();
  const Eigen::Vector3d c1 = -Rt * cfg.extrinsics.translation;  // cam-1 center in cam-0 frame

  std::vector<double> a0(static_cast<std::size_t>(w) * h), b0(a0.size());
  std::vector<double> a1(a0.size()), b1(a0.size());
  std::vector<float> depth0(a0.size());
  double a_min = std::numeric_limits<double>::max(), a_max = -a_min;
  double b_min = a_min, b_max = -a_min;
  const auto grow = [&](double a, double b) {
    a_min = std::min(a_min, a);
    a_max = std::max(a_max, a);
    b_min = std::min(b_min, b);
    b_max = std::max(b_max, b);
  };

  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      const std::size_t i = static_cast<std::size_t>(v) * w + u;
      Ray ray0{Eigen::Vector3d::Zero(), {(u - K.cx) / K.fx, (v - K.cy) / K.fy, 1.0}};
      const double t0 = intersect(cfg, ray0);
      const Eigen::Vector3d X0 = t0 * ray0.dir;
      depth0[i] = static_cast<float>(X0.z());
      a0[i] = X0.x() * px_per_m;
      b0[i] = X0.y() * px_per_m;
      grow(a0[i], b0[i]);

      Ray ray1{c1, Rt * Eigen::Vector3d((u - K.cx) / K.fx, (v - K.cy) / K.fy, 1.0)};
      const double t1 = intersect(cfg, ray1);
      const Eigen::Vector3d X1 = ray1.origin + t1 * ray1.dir;
      a1[i] = X1.x() * px_per_m;
      b1[i] = X1.y() * px_per_m;
      grow(a1[i], b1[i]);
    }

  // Pass 2: evaluate the shared texture, then add per-image noise.
  TextureSampler tex(cfg, a_min, a_max, b_min, b_max);
  SyntheticScene scene;
  scene.img0 = GrayImage(w, h);
  scene.img1 = GrayImage(w, h);
  scene.depth0 = std::move(depth0);
  scene.s_true = cfg.s_true;
  scene.intrinsics = cfg.intrinsics;
  scene.extrinsics = cfg.extrinsics;
  scene.noise_sigma = cfg.noise_sigma;
  scene.seed = cfg.seed;
  for (std::size_t i = 0; i < a0.size(); ++i) {
    scene.img0.data[i] = tex(a0[i], b0[i]);
    scene.img1.data[i] = tex(a1[i], b1[i]);
  }
  if (cfg.noise_sigma > 0.0) {
    for (int which = 0; which < 2; ++which) {
      GrayImage& img = which == 0 ? scene.img0 : scene.img1;
      std::mt19937_64 rng(stream_seed(cfg.seed, 200 + which));
      std::normal_distribution<double> gauss(0.0, cfg.noise_sigma);
      for (auto& v : img.data)
        v = std::clamp(v + gauss(rng), 0.0, 255.0);
    }
  }
  return scene;
}

std::vector<ScalePoint> sample_points(const SyntheticScene& scene, int n,
                                      double inv_depth_noise, std::uint64_t seed) {
  if (n < 1) throw ConfigError("sample_points: need n >= 1");
  if (inv_depth_noise < 0.0) throw ConfigError("sample_points: noise sigma must be non-negative");
  const GrayImage& img = scene.img0;

  // Gradient-magnitude-proportional sampling without replacement
  // (exponential-key reservoir: smallest -log(u)/w win).
  struct Candidate {
    double key;
    int u, v;
  };
  std::mt19937_64 rng(stream_seed(seed, 300));
  std::uniform_real_distribution<double> uni(std::numeric_limits<double>::min(), 1.0);
  std::vector<Candidate> candidates;
  candidates.reserve(img.data.size());
  for (int v = 1; v < img.height - 1; ++v)
    for (int u = 1; u < img.width - 1; ++u) {
      const double gu = 0.5 * (img.at(u + 1, v) - img.at(u - 1, v));
      const double gv = 0.5 * (img.at(u, v + 1) - img.at(u, v - 1));
      const double mag = std::sqrt(gu * gu + gv * gv);
      const double draw = uni(rng);  // consumed for every pixel to keep order fixed
      if (mag > 0.0) candidates.push_back({-std::log(draw) / mag, u, v});
    }
  if (static_cast<int>(candidates.size()) < n)
    throw ConfigError("sample_points: fewer than n pixels with nonzero gradient");

  std::nth_element(candidates.begin(), candidates.begin() + (n - 1), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.key < b.key; });
  candidates.resize(n);
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return a.v != b.v ? a.v < b.v : a.u < b.u;
  });

  std::normal_distribution<double> gauss(0.0, inv_depth_noise);
  std::vector<ScalePoint> points;
  points.reserve(n);
  for (const Candidate& c : candidates) {
    ScalePoint pt;
    pt.host_pixel = Pixel(c.u, c.v);
    pt.inv_depth = scene.s_true / scene.depth_at(c.u, c.v);
    if (inv_depth_noise > 0.0) pt.inv_depth *= std::exp(gauss(rng));
    pt.host_intensity = img.at(c.u, c.v);
    points.push_back(pt);
  }
  return points;
}

BruteForceResult brute_force_scale(const KeyframeBundle& bundle, double s_lo, double s_hi,
                                   int steps, const OptimizerConfig& cfg) {
  if (!(s_lo > 0.0) || !(s_lo < s_hi)) throw ConfigError("brute_force_scale: need 0 < s_lo < s_hi");
  if (steps < 2) throw ConfigError("brute_force_scale: need at least 2 steps");

  BruteForceResult result;
  result.scales.resize(steps);
  result.energies.assign(steps, std::numeric_limits<double>::quiet_NaN());
  const double log_lo = std::log(s_lo);
  const double log_step = (std::log(s_hi) - log_lo) / (steps - 1);

  double best = std::numeric_limits<double>::max();
  bool any_valid = false;
  for (int i = 0; i < steps; ++i) {
    const double s = std::exp(log_lo + i * log_step);
    result.scales[i] = s;
    try {
      result.energies[i] = energy(bundle, s, 0, cfg).first;
    } catch (const OptimizationError&) {
      continue;  // insufficient overlap at this grid cell
    }
    any_valid = true;
    if (result.energies[i] < best) {
      best = result.energies[i];
      result.best_index = static_cast<std::size_t>(i);
      result.best_scale = s;
    }
  }
  if (!any_valid)
    throw OptimizationError(OptimizationError::Kind::oracle_failure,
                            "brute-force oracle: insufficient overlap on the whole grid");
  return result;
}

}  // namespace scaleopt
