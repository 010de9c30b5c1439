#include "scaleopt/image.hpp"

#include <cmath>

namespace scaleopt {

namespace {

struct BilinearSetup {
  int i0, j0, i1, j1;
  double fu, fv;
};

// Indices clamped so that zero-weight neighbours never read out of bounds
// (u == width-1 has fu == 1 against i1 == width-1).
inline BilinearSetup bilinear_setup(const GrayImage& img, const Pixel& p, int max_i, int max_j) {
  BilinearSetup s;
  s.i0 = static_cast<int>(std::floor(p.x()));
  s.j0 = static_cast<int>(std::floor(p.y()));
  if (s.i0 > max_i - 1) s.i0 = max_i - 1;
  if (s.j0 > max_j - 1) s.j0 = max_j - 1;
  s.i1 = s.i0 + 1;
  s.j1 = s.j0 + 1;
  s.fu = p.x() - s.i0;
  s.fv = p.y() - s.j0;
  (void)img;
  return s;
}

}  // namespace

std::optional<double> sample_bilinear(const GrayImage& img, const Pixel& p) {
  if (!p.allFinite()) return std::nullopt;
  if (p.x() < 0.0 || p.y() < 0.0 || p.x() > img.width - 1 || p.y() > img.height - 1)
    return std::nullopt;
  const auto s = bilinear_setup(img, p, img.width - 1, img.height - 1);
  const double w00 = (1.0 - s.fu) * (1.0 - s.fv);
  const double w10 = s.fu * (1.0 - s.fv);
  const double w01 = (1.0 - s.fu) * s.fv;
  const double w11 = s.fu * s.fv;
  return w00 * img.at(s.i0, s.j0) + w10 * img.at(s.i1, s.j0) +
         w01 * img.at(s.i0, s.j1) + w11 * img.at(s.i1, s.j1);
}

bool in_interior(const GrayImage& img, const Pixel& p) {
  return p.allFinite() && p.x() >= 1.0 && p.y() >= 1.0 && p.x() <= img.width - 2 &&
         p.y() <= img.height - 2;
}

std::optional<Eigen::Vector2d> gradient_bilinear(const GrayImage& img, const Pixel& p) {
  if (!in_interior(img, p)) return std::nullopt;
  // Neighbour gradients live on [1, w-2] x [1, h-2]; clamping keeps the
  // zero-weight column/row at u == w-2 in range.
  const auto s = bilinear_setup(img, p, img.width - 2, img.height - 2);
  const auto gu = [&](int i, int j) { return 0.5 * (img.at(i + 1, j) - img.at(i - 1, j)); };
  const auto gv = [&](int i, int j) { return 0.5 * (img.at(i, j + 1) - img.at(i, j - 1)); };
  const double w00 = (1.0 - s.fu) * (1.0 - s.fv);
  const double w10 = s.fu * (1.0 - s.fv);
  const double w01 = (1.0 - s.fu) * s.fv;
  const double w11 = s.fu * s.fv;
  return Eigen::Vector2d{
      w00 * gu(s.i0, s.j0) + w10 * gu(s.i1, s.j0) + w01 * gu(s.i0, s.j1) + w11 * gu(s.i1, s.j1),
      w00 * gv(s.i0, s.j0) + w10 * gv(s.i1, s.j0) + w01 * gv(s.i0, s.j1) + w11 * gv(s.i1, s.j1)};
}

ImagePyramid build_pyramid(const GrayImage& img, const CameraIntrinsics& K, int levels) {
  if (levels < 1) throw ConfigError("build_pyramid: need at least one level");
  if (img.empty()) throw ConfigError("build_pyramid: empty image");
  const int min_dim = 1 << (levels - 1);
  if (img.width < min_dim || img.height < min_dim)
    throw ConfigError("build_pyramid: image too small for requested level count");
  K.validate();

  ImagePyramid pyr;
  pyr.levels.reserve(levels);
  pyr.intrinsics.reserve(levels);
  pyr.levels.push_back(img);
  pyr.intrinsics.push_back(K);
  for (int l = 1; l < levels; ++l) {
    const GrayImage& fine = pyr.levels.back();
    GrayImage coarse(fine.width / 2, fine.height / 2);
    for (int v = 0; v < coarse.height; ++v)
      for (int u = 0; u < coarse.width; ++u)
        coarse.at(u, v) = 0.25 * (fine.at(2 * u, 2 * v) + fine.at(2 * u + 1, 2 * v) +
                                   fine.at(2 * u, 2 * v + 1) + fine.at(2 * u + 1, 2 * v + 1));
    pyr.levels.push_back(std::move(coarse));
    pyr.intrinsics.push_back(K.at_level(l));
  }
  return pyr;
}

}  // namespace scaleopt
