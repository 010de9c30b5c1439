#pragma once

#include <Eigen/Core>
#include <optional>

#include "scaleopt/errors.hpp"

namespace scaleopt {

using Pixel = Eigen::Vector2d;
using Point3 = Eigen::Vector3d;

/// Points closer than this to the image plane of the target camera are
/// treated as behind it.
inline constexpr double kMinDepth = 1e-6;

/// Pinhole parameters of one (undistorted) camera, plus the image size so
/// that projection validity can be checked next to the camera model.
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  /// Throws ConfigError unless fx,fy > 0 and the principal point is inside
  /// the image.
  void validate() const;

  /// Intrinsics of pyramid level l under 2x downsampling with the
  /// pixel-center convention: c_l = (c + 0.5) / 2^l - 0.5.
  CameraIntrinsics at_level(int level) const;
};

/// Rigid transform from the reference camera to the second camera of the
/// stereo pair: X1 = R * X0 + t.
struct StereoExtrinsics {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  /// Throws ConfigError unless R is orthonormal with det +1 (1e-9) and
  /// the baseline is nonzero.
  void validate() const;

  /// Rectified pair with horizontal baseline b: (I, (-b, 0, 0)).
  static StereoExtrinsics rectified(double baseline);
};

/// Map a pixel with inverse depth to a 3D point in the camera frame.
/// Returns ((u-cx)/fx, (v-cy)/fy, 1) / inv_depth, so z = 1/inv_depth.
/// Throws ConfigError for non-positive or non-finite inverse depth.
Point3 back_project(const Pixel& p, double inv_depth, const CameraIntrinsics& K);

/// Pinhole projection. Throws ConfigError when z <= kMinDepth.
Pixel project(const Point3& X, const CameraIntrinsics& K);

/// Projection of a rotated point under scale s into the second camera:
///   u = (s*fx*x' + fx*tx) / (s*z' + tz) + cx   (likewise v).
/// Returns nullopt when s*z' + tz <= kMinDepth (behind camera); callers
/// skip such points rather than clamping.
std::optional<Pixel> project_rotated(const Point3& rotated, double s,
                                     const Eigen::Vector3d& t,
                                     const CameraIntrinsics& K1);

struct StereoProjection {
  Pixel pixel;
  Point3 rotated;  // R * back_project(p, inv_depth, K0), reused by the Jacobian
};

/// Full scaled stereo projection of a host pixel: back-project with K0,
/// rotate by T.rotation, scale by s, translate, project with K1.
std::optional<StereoProjection> project_scaled(const Pixel& p, double inv_depth,
                                               double s, const StereoExtrinsics& T,
                                               const CameraIntrinsics& K0,
                                               const CameraIntrinsics& K1);

/// Derivative of the scaled stereo projection with respect to s:
///   1/(s*z'+tz)^2 * [fx*x'*tz - fx*z'*tx, fy*y'*tz - fy*z'*ty].
/// Throws ConfigError when the denominator is at or below kMinDepth.
Eigen::Vector2d jacobian_scale(const Point3& rotated, double s,
                               const StereoExtrinsics& T,
                               const CameraIntrinsics& K1);

}  // namespace scaleopt
