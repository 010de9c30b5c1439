#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "scaleopt/geometry.hpp"

namespace scaleopt {

/// Row-major grayscale buffer with intensities in [0, 255],
/// regardless of the input bit depth. Immutable after construction by
/// convention; concurrent reads are unrestricted.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  GrayImage() = default;
  GrayImage(int w, int h, double fill = 0.0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  double& at(int u, int v) { return data[static_cast<std::size_t>(v) * width + u]; }
  double at(int u, int v) const { return data[static_cast<std::size_t>(v) * width + u]; }

  bool empty() const { return data.empty(); }
};

/// Bilinear interpolation of the four neighbours. Valid for
/// 0 <= u <= width-1, 0 <= v <= height-1; returns nullopt outside.
/// Exact at integer coordinates and for affine intensity functions.
std::optional<double> sample_bilinear(const GrayImage& img, const Pixel& p);

/// Bilinear interpolation of per-pixel central-difference gradients
/// (g_u = (I[u+1]-I[u-1])/2, likewise g_v). Valid at least 1 px from
/// every border; returns nullopt outside.
std::optional<Eigen::Vector2d> gradient_bilinear(const GrayImage& img, const Pixel& p);

/// True when p lies in the region where intensity and gradient can be
/// co-sampled: [1, width-2] x [1, height-2].
bool in_interior(const GrayImage& img, const Pixel& p);

/// Level-0 pixel coordinates expressed at pyramid level l under the
/// pixel-center convention.
inline Pixel pixel_at_level(const Pixel& p, int level) {
  const double inv = 1.0 / double(1 << level);
  return {(p.x() + 0.5) * inv - 0.5, (p.y() + 0.5) * inv - 0.5};
}

/// Coarse-to-fine stack of 2x2 box-averaged images with per-level
/// intrinsics. Level 0 is full resolution.
struct ImagePyramid {
  std::vector<GrayImage> levels;
  std::vector<CameraIntrinsics> intrinsics;

  int num_levels() const { return static_cast<int>(levels.size()); }
  const GrayImage& level(int l) const { return levels[l]; }
  const CameraIntrinsics& K(int l) const { return intrinsics[l]; }
};

/// Each coarser level is the 2x2 block average of the finer one (odd
/// trailing row/column dropped). Throws ConfigError when the image is
/// smaller than 2^(levels-1) in either dimension.
ImagePyramid build_pyramid(const GrayImage& img, const CameraIntrinsics& K, int levels);

}  // namespace scaleopt
