#pragma once

#include <string>
#include <vector>

#include "scaleopt/geometry.hpp"
#include "scaleopt/scale_optimizer.hpp"
#include "scaleopt/synthetic.hpp"

namespace scaleopt {

struct Calibration {
  CameraIntrinsics K0;
  CameraIntrinsics K1;
  StereoExtrinsics extrinsics;
};

/// KITTI-style calib.txt: `P0:` and `P1:` lines of 12 floats (row-major
/// 3x4 rectified projection matrices). Intrinsics come from the upper-left
/// 3x3 blocks; the baseline is -P1[0,3] / P1[0,0] and the extrinsics are
/// (I, (-b, 0, 0)). The file does not carry the image size, so it is
/// passed in. Throws ParseError with a line number on malformed input and
/// on a zero baseline.
Calibration load_kitti_calib(const std::string& path, int width, int height);

/// World-from-camera pose, row-major 3x4.
struct TrajectoryPose {
  Eigen::Matrix<double, 3, 4> matrix = Eigen::Matrix<double, 3, 4>::Identity();

  Eigen::Matrix3d rotation() const { return matrix.leftCols<3>(); }
  Eigen::Vector3d translation() const { return matrix.col(3); }
  static TrajectoryPose from_parts(const Eigen::Matrix3d& R, const Eigen::Vector3d& t);
};

/// KITTI pose files: one pose per line, 12 space-separated floats.
/// Rejects lines with the wrong token count or a non-orthonormal rotation
/// (1e-6), reporting the line number.
std::vector<TrajectoryPose> load_trajectory(const std::string& path);
void save_trajectory(const std::vector<TrajectoryPose>& poses, const std::string& path);

struct PointCloud {
  std::vector<ScalePoint> points;
  int rejected_lines = 0;
};

/// CSV with header `u,v,inv_depth`. Lines with non-positive inverse depth
/// or an out-of-image pixel are rejected and counted; more than half
/// rejected is a ParseError. Host intensities are sampled from img0.
PointCloud load_point_cloud(const std::string& path, const GrayImage& img0);
void save_point_cloud(const std::vector<ScalePoint>& points, const std::string& path);

/// Sidecar written next to rendered scenes: calibration, s_true, noise,
/// seed and the companion file names.
void save_scene_json(const SyntheticScene& scene, const std::string& path);

struct SceneFiles {
  Calibration calib;
  double s_true = 1.0;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  std::string img0_file, img1_file, depth_file, points_file;
};
SceneFiles load_scene_json(const std::string& path);

/// Scene configuration from a declarative JSON file (see README for the
/// schema).
SceneConfig load_scene_config(const std::string& path);

}  // namespace scaleopt
