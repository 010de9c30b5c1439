#pragma once

#include <vector>

#include "scaleopt/image.hpp"
#include "scaleopt/scale_optimizer.hpp"

namespace scaleopt {

enum class MatchMetric { ssd, ncc };

/// Exhaustive epipolar patch search on a rectified pair.
struct MatchConfig {
  int patch_radius = 3;  // 7x7 patch
  int search_min = 0;    // disparity range, pixels
  int search_max = 96;
  MatchMetric metric = MatchMetric::ncc;
  double uniqueness_ratio = 0.9;  // reject when best/second-best cost exceeds this

  void validate() const;
};

struct MatchResult {
  bool accepted = false;
  double disparity = 0.0;   // positive: u1 = u0 - disparity
  double cost_ratio = 1.0;  // best / second-best cost
};

/// Best-cost disparity over the integer search range with parabolic
/// subpixel refinement. Rejected when the search window leaves either
/// image, the patch is textureless, or the best/second-best cost ratio
/// exceeds the uniqueness threshold (repetitive-texture ambiguity).
MatchResult epipolar_match(const GrayImage& img0, const GrayImage& img1, const Pixel& p,
                           const MatchConfig& cfg);

/// Robust scale from triangulated matches: each accepted match yields the
/// candidate s_p = (f_x * baseline / disparity_p) * inv_depth_p; returns
/// the median. Throws OptimizationError(baseline_failure) with fewer than
/// 10 accepted matches.
double scale_from_matches(const std::vector<ScalePoint>& points,
                          const std::vector<MatchResult>& matches, double f_x,
                          double baseline);

}  // namespace scaleopt
