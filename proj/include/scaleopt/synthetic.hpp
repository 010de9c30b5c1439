#pragma once

#include <cstdint>
#include <vector>

#include "scaleopt/image.hpp"
#include "scaleopt/scale_optimizer.hpp"

namespace scaleopt {

enum class GeometryKind {
  fronto_plane,   // plane z = plane_depth
  inclined_plane, // plane normal . X = plane_offset
  height_field    // z = plane_depth + amplitude * sin(2 pi x / period) * cos(2 pi y / period)
};

enum class TextureKind {
  band_limited,  // seeded white noise, 5x5 box blurred, three octaves
  sinusoid,      // horizontal sinusoid of texture_period_px with a slow vertical modulation
  checkerboard   // two tones, tile edge = texture_period_px / 2
};

/// Declarative description of a ground-truth stereo scene. Texture
/// coordinates are scaled so that one texture pixel spans one image pixel
/// at the reference depth of the geometry.
struct SceneConfig {
  GeometryKind geometry = GeometryKind::fronto_plane;
  double plane_depth = 5.0;                              // meters, fronto/height-field
  Eigen::Vector3d plane_normal = Eigen::Vector3d(0, 0, 1);  // inclined plane
  double plane_offset = 5.0;
  double field_amplitude = 0.35;  // meters
  double field_period = 5.0;      // meters

  TextureKind texture = TextureKind::band_limited;
  double texture_period_px = 8.0;
  double texture_contrast = 60.0;

  CameraIntrinsics intrinsics;   // shared by both cameras
  StereoExtrinsics extrinsics;   // reference -> second camera; zero baseline allowed here
  double noise_sigma = 0.0;      // additive Gaussian, intensity units, per image
  double s_true = 1.0;           // scale used to mis-scale exported inverse depths
  std::uint64_t seed = 1;

  void validate() const;
};

/// A rendered stereo pair with the true depth of every img0 pixel.
/// img1 is photo-consistent with img0 under depth0 and the extrinsics,
/// up to interpolation and noise.
struct SyntheticScene {
  GrayImage img0;
  GrayImage img1;
  std::vector<float> depth0;  // row-major, camera-0 z in meters
  double s_true = 1.0;
  CameraIntrinsics intrinsics;
  StereoExtrinsics extrinsics;
  double noise_sigma = 0.0;
  std::uint64_t seed = 1;

  double depth_at(int u, int v) const {
    return depth0[static_cast<std::size_t>(v) * img0.width + u];
  }
};

/// Deterministic per seed. img1 is rendered by inverse warping: every img1
/// ray is intersected with the geometry and looked up in the same
/// continuous texture as img0, so there are no splatting holes.
/// Throws ConfigError when the geometry falls behind either camera.
SyntheticScene render_scene(const SceneConfig& cfg);

/// Draws n distinct interior pixels with probability proportional to the
/// image gradient magnitude, mirroring direct-VO point selection. Inverse
/// depths are set to s_true / depth (so the optimizer's true answer is
/// s_true), then perturbed by multiplicative log-normal noise.
/// Throws ConfigError when fewer than n pixels have nonzero gradient.
std::vector<ScalePoint> sample_points(const SyntheticScene& scene, int n,
                                      double inv_depth_noise, std::uint64_t seed);

struct BruteForceResult {
  std::vector<double> scales;    // log-uniform grid
  std::vector<double> energies;  // NaN where too few points were valid
  double best_scale = 0.0;
  std::size_t best_index = 0;
};

/// Independent grid-search oracle for the scale energy, evaluated at the
/// finest pyramid level. Throws OptimizationError(oracle_failure) when no
/// grid point has sufficient overlap.
BruteForceResult brute_force_scale(const KeyframeBundle& bundle, double s_lo, double s_hi,
                                   int steps, const OptimizerConfig& cfg);

}  // namespace scaleopt
