#include "scaleopt/stereo_baseline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "scaleopt/errors.hpp"

namespace scaleopt {

void MatchConfig::validate() const {
  if (patch_radius < 1) throw ConfigError("match: patch radius must be >= 1");
  if (search_min < 0 || search_min >= search_max)
    throw ConfigError("match: need 0 <= search_min < search_max");
  if (!(uniqueness_ratio > 0.0) || uniqueness_ratio > 1.0)
    throw ConfigError("match: uniqueness ratio must be in (0, 1]");
}

namespace {

constexpr double kInvalidCost = std::numeric_limits<double>::max();
constexpr double kPerfectCost = 1e-9;  // integer-exact match; skip refinement

// SSD cost, or 1 - NCC in [0, 2]. kInvalidCost for textureless patches.
double patch_cost(const GrayImage& img0, const GrayImage& img1, int u0, int v0, int u1,
                  const MatchConfig& cfg) {
  const int R = cfg.patch_radius;
  if (cfg.metric == MatchMetric::ssd) {
    double ssd = 0.0;
    for (int dv = -R; dv <= R; ++dv)
      for (int du = -R; du <= R; ++du) {
        const double d = double(img0.at(u0 + du, v0 + dv)) - double(img1.at(u1 + du, v0 + dv));
        ssd += d * d;
      }
    return ssd;
  }
  const double n = double((2 * R + 1) * (2 * R + 1));
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (int dv = -R; dv <= R; ++dv)
    for (int du = -R; du <= R; ++du) {
      const double x = img0.at(u0 + du, v0 + dv);
      const double y = img1.at(u1 + du, v0 + dv);
      sx += x;
      sy += y;
      sxx += x * x;
      syy += y * y;
      sxy += x * y;
    }
  const double varx = n * sxx - sx * sx;
  const double vary = n * syy - sy * sy;
  if (varx <= 1e-12 || vary <= 1e-12) return kInvalidCost;  // flat patch
  const double ncc = (n * sxy - sx * sy) / std::sqrt(varx * vary);
  return 1.0 - ncc;
}

}  // namespace

MatchResult epipolar_match(const GrayImage& img0, const GrayImage& img1, const Pixel& p,
                           const MatchConfig& cfg) {
  cfg.validate();
  MatchResult result;
  const int R = cfg.patch_radius;
  const int u0 = static_cast<int>(std::lround(p.x()));
  const int v0 = static_cast<int>(std::lround(p.y()));
  if (u0 - R < 0 || u0 + R >= img0.width || v0 - R < 0 || v0 + R >= img0.height)
    return result;  // reference patch leaves img0

  const int n_disp = cfg.search_max - cfg.search_min + 1;
  std::vector<double> cost(n_disp, kInvalidCost);
  int best_i = -1;
  double best = kInvalidCost;
  for (int i = 0; i < n_disp; ++i) {
    const int d = cfg.search_min + i;
    const int u1 = u0 - d;
    if (u1 - R < 0 || u1 + R >= img1.width || v0 - R < 0 || v0 + R >= img1.height)
      continue;  // search window leaves img1
    cost[i] = patch_cost(img0, img1, u0, v0, u1, cfg);
    if (cost[i] < best) {
      best = cost[i];
      best_i = i;
    }
  }
  if (best_i < 0 || best >= kInvalidCost) return result;

  // Second-best outside the +-1 neighbourhood of the winner.
  double second = kInvalidCost;
  for (int i = 0; i < n_disp; ++i)
    if (std::abs(i - best_i) > 1) second = std::min(second, cost[i]);

  if (second >= kInvalidCost) {
    result.cost_ratio = 0.0;  // nothing else to compare against
  } else if (second <= kPerfectCost) {
    result.cost_ratio = 1.0;  // duplicate perfect optima, fully ambiguous
  } else {
    result.cost_ratio = best / second;
  }
  if (result.cost_ratio > cfg.uniqueness_ratio) return result;

  double disparity = cfg.search_min + best_i;
  // Parabolic refinement, skipped at an exact integer optimum so integer
  // shifts are matched exactly.
  if (best > kPerfectCost && best_i > 0 && best_i + 1 < n_disp &&
      cost[best_i - 1] < kInvalidCost && cost[best_i + 1] < kInvalidCost) {
    const double cm = cost[best_i - 1], c0 = cost[best_i], cp = cost[best_i + 1];
    const double denom = cm - 2.0 * c0 + cp;
    if (denom > 1e-12) {
      const double offset = 0.5 * (cm - cp) / denom;
      disparity += std::clamp(offset, -0.5, 0.5);
    }
  }
  result.accepted = true;
  result.disparity = disparity;
  return result;
}

double scale_from_matches(const std::vector<ScalePoint>& points,
                          const std::vector<MatchResult>& matches, double f_x,
                          double baseline) {
  if (points.size() != matches.size())
    throw ConfigError("scale_from_matches: points and matches differ in length");
  if (!(f_x > 0.0) || !(baseline > 0.0))
    throw ConfigError("scale_from_matches: focal length and baseline must be positive");

  std::vector<double> candidates;
  candidates.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!matches[i].accepted || matches[i].disparity <= 0.0) continue;
    const double depth = f_x * baseline / matches[i].disparity;
    candidates.push_back(depth * points[i].inv_depth);
  }
  if (candidates.size() < 10)
    throw OptimizationError(OptimizationError::Kind::baseline_failure,
                            "stereo baseline: only " + std::to_string(candidates.size()) +
                                " accepted matches");
  const std::size_t mid = candidates.size() / 2;
  std::nth_element(candidates.begin(), candidates.begin() + mid, candidates.end());
  return candidates[mid];
}

}  // namespace scaleopt
