#include "scaleopt/evaluation.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>

#include "scaleopt/errors.hpp"

namespace scaleopt {

namespace {

double rotation_angle(const Eigen::Matrix3d& R) {
  const double c = std::clamp(0.5 * (R.trace() - 1.0), -1.0, 1.0);
  return std::acos(c);
}

struct RelativePose {
  Eigen::Matrix3d rotation;
  Eigen::Vector3d translation;
};

RelativePose relative_pose(const TrajectoryPose& a, const TrajectoryPose& b) {
  const Eigen::Matrix3d Rat = a.rotation().transpose();
  return {Rat * b.rotation(), Rat * (b.translation() - a.translation())};
}

// Accumulated ground-truth path length up to each frame.
std::vector<double> path_distances(const std::vector<TrajectoryPose>& poses) {
  std::vector<double> dist(poses.size(), 0.0);
  for (std::size_t i = 1; i < poses.size(); ++i)
    dist[i] = dist[i - 1] + (poses[i].translation() - poses[i - 1].translation()).norm();
  return dist;
}

// First frame at which the accumulated path length reaches dist[first] + len.
int end_frame(const std::vector<double>& dist, int first, double len) {
  for (std::size_t i = static_cast<std::size_t>(first); i < dist.size(); ++i)
    if (dist[i] >= dist[static_cast<std::size_t>(first)] + len) return static_cast<int>(i);
  return -1;
}

}  // namespace

EvalReport relative_errors(const std::vector<TrajectoryPose>& gt,
                           const std::vector<TrajectoryPose>& est,
                           const std::vector<double>& lengths) {
  if (gt.size() != est.size())
    throw ConfigError("relative_errors: trajectories differ in length");
  if (gt.size() < 2) throw ConfigError("relative_errors: need at least 2 poses");
  for (double L : lengths)
    if (!(L > 0.0)) throw ConfigError("relative_errors: segment lengths must be positive");

  const std::vector<double> dist = path_distances(gt);

  EvalReport report;
  double t_sum_all = 0.0, r_sum_all = 0.0;
  int n_all = 0;
  for (double L : lengths) {
    double t_sum = 0.0, r_sum = 0.0;
    int n = 0;
    for (int first = 0; first < static_cast<int>(gt.size()); ++first) {
      const int last = end_frame(dist, first, L);
      if (last < 0) break;  // no later start frame can cover L either
      // E = gt_rel^-1 * est_rel, formed from rigid parts so that identical
      // trajectories yield exactly zero error.
      const RelativePose gt_rel = relative_pose(gt[first], gt[last]);
      const RelativePose est_rel = relative_pose(est[first], est[last]);
      const Eigen::Vector3d t_err =
          gt_rel.rotation.transpose() * (est_rel.translation - gt_rel.translation);
      t_sum += t_err.norm() / L;
      if (gt_rel.rotation != est_rel.rotation)
        r_sum += rotation_angle(gt_rel.rotation.transpose() * est_rel.rotation) / L;
      ++n;
    }
    if (n == 0) continue;  // trajectory shorter than this length
    SegmentError e;
    e.length = L;
    e.translational_pct = 100.0 * t_sum / n;
    e.rotational_deg_per_100m = (r_sum / n) * (180.0 / M_PI) * 100.0;
    e.segment_count = n;
    report.per_length.push_back(e);
    t_sum_all += t_sum;
    r_sum_all += r_sum;
    n_all += n;
  }
  if (n_all > 0) {
    report.overall.length = 0.0;
    report.overall.translational_pct = 100.0 * t_sum_all / n_all;
    report.overall.rotational_deg_per_100m = (r_sum_all / n_all) * (180.0 / M_PI) * 100.0;
    report.overall.segment_count = n_all;
  }
  return report;
}

std::vector<TrajectoryPose> apply_scale_correction(const std::vector<TrajectoryPose>& poses,
                                                   const std::vector<double>& scales,
                                                   const std::vector<int>& keyframe_indices) {
  if (scales.size() != keyframe_indices.size())
    throw ConfigError("apply_scale_correction: scales and keyframes differ in length");
  if (scales.empty()) throw ConfigError("apply_scale_correction: empty keyframe list");
  for (double s : scales)
    if (!(s > 0.0)) throw ConfigError("apply_scale_correction: scales must be positive");
  for (std::size_t i = 0; i < keyframe_indices.size(); ++i) {
    const int k = keyframe_indices[i];
    if (k < 0 || k >= static_cast<int>(poses.size()))
      throw ConfigError("apply_scale_correction: keyframe index out of range");
    if (i > 0 && keyframe_indices[i] <= keyframe_indices[i - 1])
      throw ConfigError("apply_scale_correction: keyframe indices must be ascending");
  }
  if (poses.empty()) return {};

  // Rotations are untouched, so the scaled chain collapses to world-frame
  // translation deltas: t'_{i+1} = t'_i + s * (t_{i+1} - t_i). Written so
  // that unit scales reproduce the input bit for bit.
  std::vector<TrajectoryPose> corrected;
  corrected.reserve(poses.size());
  corrected.push_back(poses.front());
  std::size_t kf = 0;
  for (std::size_t i = 0; i + 1 < poses.size(); ++i) {
    // Scale of the last keyframe at or before frame i; the first
    // keyframe's scale applies before it as well.
    while (kf + 1 < keyframe_indices.size() &&
           keyframe_indices[kf + 1] <= static_cast<int>(i))
      ++kf;
    const double s = scales[kf];

    const Eigen::Vector3d delta = poses[i + 1].translation() - poses[i].translation();
    const Eigen::Vector3d offset = corrected.back().translation() - poses[i].translation();
    corrected.push_back(TrajectoryPose::from_parts(
        poses[i + 1].rotation(), poses[i + 1].translation() + offset + (s - 1.0) * delta));
  }
  return corrected;
}

}  // namespace scaleopt
