#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "scaleopt/geometry.hpp"
#include "scaleopt/image.hpp"

namespace scaleopt {

/// One monocular-VO point: host pixel in level-0 coordinates of Img0,
/// inverse depth in the VO's arbitrary units, and the level-0 host
/// intensity.
struct ScalePoint {
  Pixel host_pixel = Pixel::Zero();
  double inv_depth = 0.0;
  double host_intensity = 0.0;
};

/// Input to one scale optimization: the stereo image pyramid pair, the
/// fixed stereo calibration, and the point set handed over by the
/// monocular VO.
struct KeyframeBundle {
  ImagePyramid pyr0;
  ImagePyramid pyr1;
  StereoExtrinsics extrinsics;
  std::vector<ScalePoint> points;

  /// Throws ConfigError on mismatched pyramid level counts, an empty
  /// point set, or invalid per-point fields.
  void validate() const;
};

/// Builds both pyramids and validates the result.
KeyframeBundle make_bundle(const GrayImage& img0, const GrayImage& img1,
                           const CameraIntrinsics& K0, const CameraIntrinsics& K1,
                           const StereoExtrinsics& extrinsics,
                           std::vector<ScalePoint> points, int levels);

enum class PointWeightMode {
  constant,          // w_p = constant_weight
  gradient_weighted  // w_p = c^2 / (c^2 + |grad I0(p)|^2), host gradient at level 0
};

struct OptimizerConfig {
  int levels = 4;
  int max_iterations_per_level = 15;
  double convergence_tol = 1e-5;  // on |s_inc| / s
  double huber_gamma = 9.0;       // intensity units
  int min_valid_points = 50;
  double min_valid_fraction = 0.25;
  PointWeightMode weight_mode = PointWeightMode::constant;
  double constant_weight = 1.0;
  double gradient_weight_c = 50.0;

  void validate() const;
};

/// Iterates of s outside this box abort the optimization: a legitimate
/// stereo rig never produces scales anywhere near these bounds.
inline constexpr double kScaleBoxMin = 1e-4;
inline constexpr double kScaleBoxMax = 1e4;

struct LevelTrace {
  int level = 0;
  int iterations = 0;
  double final_energy = 0.0;
  int valid_count = 0;
  bool reached_tolerance = false;
  /// Energy before the first step and after each accepted step;
  /// non-increasing by the step-control contract.
  std::vector<double> iteration_energies;
};

struct ScaleResult {
  double scale = 0.0;
  double initial_scale = 0.0;
  bool converged = false;
  double valid_fraction = 0.0;
  std::vector<LevelTrace> trace;  // coarsest first
};

/// Huber penalty: r^2 for |r| <= gamma, gamma * (2|r| - gamma) beyond;
/// C1-continuous at |r| = gamma.
double huber_energy(double r, double gamma);

/// Equivalent IRLS weight: 1 for |r| <= gamma, gamma/|r| beyond.
double huber_weight(double r, double gamma);

/// Photometric residual of one point at pyramid `level`:
///   I1_l at the scaled stereo projection minus the host intensity
///   re-sampled from pyr0 at the same level.
/// nullopt when the projection is behind the camera or either sample
/// falls outside the valid region; invalid is a value, not a failure.
std::optional<double> residual(const ScalePoint& point, double s,
                               const KeyframeBundle& bundle, int level);

/// Total robust energy and the number of valid points at scale s.
/// Throws OptimizationError(insufficient_overlap) when fewer than
/// cfg.min_valid_points points are valid.
std::pair<double, int> energy(const KeyframeBundle& bundle, double s, int level,
                              const OptimizerConfig& cfg);

/// One Gauss-Newton increment for the scalar normal equation
///   s_inc = -(sum w J r) / (sum w J^2),
/// where J = grad I1 . dPi1/ds and w is the IRLS weight times w_p.
/// Throws insufficient_overlap / degenerate_normal_equation.
double gn_step(const KeyframeBundle& bundle, double s, int level,
               const OptimizerConfig& cfg);

/// Coarse-to-fine Gauss-Newton minimization of the scale energy with
/// backtracking step halving. Throws OptimizationError when no pyramid
/// level yields a usable normal equation, or when the iterate leaves the
/// scale box.
ScaleResult optimize_scale(const KeyframeBundle& bundle, double s0,
                           const OptimizerConfig& cfg);

}  // namespace scaleopt
