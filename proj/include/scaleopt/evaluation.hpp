#pragma once

#include <vector>

#include "scaleopt/io.hpp"

namespace scaleopt {

/// KITTI-protocol relative error over segments of one nominal length.
struct SegmentError {
  double length = 0.0;             // meters
  double translational_pct = 0.0;  // ||trans(E)|| / L, percent
  double rotational_deg_per_100m = 0.0;
  int segment_count = 0;
};

struct EvalReport {
  std::vector<SegmentError> per_length;  // lengths with at least one segment
  SegmentError overall;                  // averaged over every (start, length) segment
};

/// KITTI devkit protocol with start-frame stride 1: for every start frame
/// and length L, the end frame is the first where the accumulated ground
/// truth path length reaches L. The error transform is
/// E = (gt_rel)^-1 * (est_rel); translational error is ||trans(E)||/L and
/// rotational error angle(rot(E))/L, reported per deg/100 m. Lengths the
/// trajectory cannot cover produce no entry.
EvalReport relative_errors(const std::vector<TrajectoryPose>& gt,
                           const std::vector<TrajectoryPose>& est,
                           const std::vector<double>& lengths);

/// Piecewise-constant scale correction: between consecutive keyframes the
/// relative translations are multiplied by the keyframe's scale (rotations
/// untouched), then the chain is rebuilt from the first pose. Poses before
/// the first keyframe use the first keyframe's scale.
std::vector<TrajectoryPose> apply_scale_correction(const std::vector<TrajectoryPose>& poses,
                                                   const std::vector<double>& scales,
                                                   const std::vector<int>& keyframe_indices);

}  // namespace scaleopt
