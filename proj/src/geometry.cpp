#include "scaleopt/geometry.hpp"

#include <Eigen/LU>

#include <cmath>

namespace scaleopt {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy))
    throw ConfigError("intrinsics: focal lengths must be positive and finite");
  if (width <= 0 || height <= 0)
    throw ConfigError("intrinsics: image size must be positive");
  if (!(cx > 0.0) || !(cx < width) || !(cy > 0.0) || !(cy < height))
    throw ConfigError("intrinsics: principal point must lie inside the image");
}

CameraIntrinsics CameraIntrinsics::at_level(int level) const {
  const double inv = 1.0 / double(1 << level);
  CameraIntrinsics K;
  K.fx = fx * inv;
  K.fy = fy * inv;
  K.cx = (cx + 0.5) * inv - 0.5;
  K.cy = (cy + 0.5) * inv - 0.5;
  K.width = width >> level;
  K.height = height >> level;
  return K;
}

void StereoExtrinsics::validate() const {
  const Eigen::Matrix3d rtr = rotation.transpose() * rotation;
  if ((rtr - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-9)
    throw ConfigError("extrinsics: rotation is not orthonormal");
  if (std::abs(rotation.determinant() - 1.0) > 1e-9)
    throw ConfigError("extrinsics: rotation determinant is not +1");
  if (!(translation.norm() > 0.0))
    throw ConfigError("extrinsics: baseline must be nonzero");
}

StereoExtrinsics StereoExtrinsics::rectified(double baseline) {
  StereoExtrinsics T;
  T.translation = Eigen::Vector3d(-baseline, 0.0, 0.0);
  return T;
}

Point3 back_project(const Pixel& p, double inv_depth, const CameraIntrinsics& K) {
  if (!(inv_depth > 0.0) || !std::isfinite(inv_depth))
    throw ConfigError("back_project: inverse depth must be positive and finite");
  if (!p.allFinite()) throw ConfigError("back_project: pixel must be finite");
  const double z = 1.0 / inv_depth;
  return {(p.x() - K.cx) / K.fx * z, (p.y() - K.cy) / K.fy * z, z};
}

Pixel project(const Point3& X, const CameraIntrinsics& K) {
  if (!(X.z() > kMinDepth))
    throw ConfigError("project: point is behind the camera");
  return {K.fx * X.x() / X.z() + K.cx, K.fy * X.y() / X.z() + K.cy};
}

std::optional<Pixel> project_rotated(const Point3& rotated, double s,
                                     const Eigen::Vector3d& t,
                                     const CameraIntrinsics& K1) {
  const double denom = s * rotated.z() + t.z();
  if (!(denom > kMinDepth)) return std::nullopt;
  return Pixel{(s * K1.fx * rotated.x() + K1.fx * t.x()) / denom + K1.cx,
               (s * K1.fy * rotated.y() + K1.fy * t.y()) / denom + K1.cy};
}

std::optional<StereoProjection> project_scaled(const Pixel& p, double inv_depth,
                                               double s, const StereoExtrinsics& T,
                                               const CameraIntrinsics& K0,
                                               const CameraIntrinsics& K1) {
  if (!(s > 0.0)) throw ConfigError("project_scaled: scale must be positive");
  const Point3 rotated = T.rotation * back_project(p, inv_depth, K0);
  auto pixel = project_rotated(rotated, s, T.translation, K1);
  if (!pixel) return std::nullopt;
  return StereoProjection{*pixel, rotated};
}

Eigen::Vector2d jacobian_scale(const Point3& rotated, double s,
                               const StereoExtrinsics& T,
                               const CameraIntrinsics& K1) {
  const Eigen::Vector3d& t = T.translation;
  const double denom = s * rotated.z() + t.z();
  if (!(denom > kMinDepth))
    throw ConfigError("jacobian_scale: degenerate geometry, point at or behind camera");
  const double inv_d2 = 1.0 / (denom * denom);
  return {inv_d2 * (K1.fx * rotated.x() * t.z() - K1.fx * rotated.z() * t.x()),
          inv_d2 * (K1.fy * rotated.y() * t.z() - K1.fy * rotated.z() * t.y())};
}

}  // namespace scaleopt
