#include "scaleopt/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "scaleopt/errors.hpp"

namespace scaleopt {

namespace {

using nlohmann::json;

std::vector<double> parse_floats(const std::string& body, std::size_t expected,
                                 const std::string& path, int line_no) {
  std::istringstream ss(body);
  std::vector<double> values;
  std::string tok;
  while (ss >> tok) {
    try {
      std::size_t pos = 0;
      values.push_back(std::stod(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ParseError(path, line_no, "malformed float '" + tok + "'");
    }
    if (!std::isfinite(values.back()))
      throw ParseError(path, line_no, "non-finite value '" + tok + "'");
  }
  if (values.size() != expected)
    throw ParseError(path, line_no,
                     "expected " + std::to_string(expected) + " floats, got " +
                         std::to_string(values.size()));
  return values;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, "cannot open file");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ParseError(path, "invalid JSON: " + std::string(e.what()));
  }
  return j;
}

}  // namespace

Calibration load_kitti_calib(const std::string& path, int width, int height) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, "cannot open file");

  bool have_p0 = false, have_p1 = false;
  std::vector<double> p0, p1;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.rfind("P0:", 0) == 0) {
      p0 = parse_floats(line.substr(3), 12, path, line_no);
      have_p0 = true;
    } else if (line.rfind("P1:", 0) == 0) {
      p1 = parse_floats(line.substr(3), 12, path, line_no);
      have_p1 = true;
    }
  }
  if (!have_p0) throw ParseError(path, "missing P0 line");
  if (!have_p1) throw ParseError(path, "missing P1 line");

  const auto to_intrinsics = [&](const std::vector<double>& p) {
    CameraIntrinsics K;
    K.fx = p[0];
    K.fy = p[5];
    K.cx = p[2];
    K.cy = p[6];
    K.width = width;
    K.height = height;
    if (!(K.fx > 0.0) || !(K.fy > 0.0)) throw ParseError(path, "zero or negative focal length");
    try {
      K.validate();
    } catch (const ConfigError& e) {
      throw ParseError(path, e.what());
    }
    return K;
  };

  Calibration calib;
  calib.K0 = to_intrinsics(p0);
  calib.K1 = to_intrinsics(p1);
  const double baseline = -p1[3] / p1[0];
  if (!(baseline > 0.0)) throw ParseError(path, "zero baseline: P1 equals P0");
  calib.extrinsics = StereoExtrinsics::rectified(baseline);
  calib.extrinsics.validate();
  return calib;
}

TrajectoryPose TrajectoryPose::from_parts(const Eigen::Matrix3d& R, const Eigen::Vector3d& t) {
  TrajectoryPose pose;
  pose.matrix.leftCols<3>() = R;
  pose.matrix.col(3) = t;
  return pose;
}

std::vector<TrajectoryPose> load_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, "cannot open file");
  std::vector<TrajectoryPose> poses;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto v = parse_floats(line, 12, path, line_no);
    TrajectoryPose pose;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 4; ++c) pose.matrix(r, c) = v[static_cast<std::size_t>(r) * 4 + c];
    const Eigen::Matrix3d R = pose.rotation();
    if ((R.transpose() * R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-6)
      throw ParseError(path, line_no, "rotation block is not orthonormal");
    poses.push_back(pose);
  }
  return poses;
}

void save_trajectory(const std::vector<TrajectoryPose>& poses, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path, "cannot open file for writing");
  char buf[64];
  for (const TrajectoryPose& pose : poses) {
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 4; ++c) {
        std::snprintf(buf, sizeof(buf), "%.17g", pose.matrix(r, c));
        out << buf << (r == 2 && c == 3 ? '\n' : ' ');
      }
  }
  if (!out) throw ParseError(path, "write failed");
}

PointCloud load_point_cloud(const std::string& path, const GrayImage& img0) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, "cannot open file");
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path, 1, "empty file");
  // Tolerate whitespace and a UTF-8 BOM around the fixed header.
  std::string header;
  for (char c : line)
    if (!std::isspace(static_cast<unsigned char>(c)) && static_cast<unsigned char>(c) < 0x80)
      header.push_back(c);
  if (header != "u,v,inv_depth")
    throw ParseError(path, 1, "expected header 'u,v,inv_depth', got '" + line + "'");

  PointCloud cloud;
  int line_no = 1;
  int total = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++total;
    std::string spaced = line;
    for (char& c : spaced)
      if (c == ',') c = ' ';
    const auto v = parse_floats(spaced, 3, path, line_no);
    ScalePoint pt;
    pt.host_pixel = Pixel(v[0], v[1]);
    pt.inv_depth = v[2];
    const bool in_image = v[0] >= 0.0 && v[1] >= 0.0 && v[0] <= img0.width - 1 &&
                          v[1] <= img0.height - 1;
    if (!(pt.inv_depth > 0.0) || !in_image) {
      ++cloud.rejected_lines;
      continue;
    }
    pt.host_intensity = *sample_bilinear(img0, pt.host_pixel);
    cloud.points.push_back(pt);
  }
  if (total > 0 && cloud.rejected_lines * 2 > total)
    throw ParseError(path, "more than half of the point lines were rejected (" +
                               std::to_string(cloud.rejected_lines) + "/" +
                               std::to_string(total) + ")");
  return cloud;
}

void save_point_cloud(const std::vector<ScalePoint>& points, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path, "cannot open file for writing");
  out << "u,v,inv_depth\n";
  char buf[96];
  for (const ScalePoint& pt : points) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", pt.host_pixel.x(), pt.host_pixel.y(),
                  pt.inv_depth);
    out << buf;
  }
  if (!out) throw ParseError(path, "write failed");
}

namespace {

json intrinsics_to_json(const CameraIntrinsics& K) {
  return json{{"fx", K.fx},       {"fy", K.fy},         {"cx", K.cx},
              {"cy", K.cy},       {"width", K.width},   {"height", K.height}};
}

CameraIntrinsics intrinsics_from_json(const json& j) {
  CameraIntrinsics K;
  K.fx = j.at("fx").get<double>();
  K.fy = j.at("fy").get<double>();
  K.cx = j.at("cx").get<double>();
  K.cy = j.at("cy").get<double>();
  K.width = j.at("width").get<int>();
  K.height = j.at("height").get<int>();
  return K;
}

json extrinsics_to_json(const StereoExtrinsics& T) {
  json rot = json::array();
  for (int r = 0; r < 3; ++r) {
    json row = json::array();
    for (int c = 0; c < 3; ++c) row.push_back(T.rotation(r, c));
    rot.push_back(row);
  }
  return json{{"rotation", rot},
              {"translation", {T.translation.x(), T.translation.y(), T.translation.z()}}};
}

StereoExtrinsics extrinsics_from_json(const json& j) {
  StereoExtrinsics T;
  if (j.contains("baseline")) return StereoExtrinsics::rectified(j.at("baseline").get<double>());
  const auto& rot = j.at("rotation");
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) T.rotation(r, c) = rot.at(r).at(c).get<double>();
  const auto& t = j.at("translation");
  T.translation = Eigen::Vector3d(t.at(0).get<double>(), t.at(1).get<double>(),
                                  t.at(2).get<double>());
  return T;
}

}  // namespace

void save_scene_json(const SyntheticScene& scene, const std::string& path) {
  json j{{"schema", "scale_opt/scene/1"},
         {"s_true", scene.s_true},
         {"noise_sigma", scene.noise_sigma},
         {"seed", scene.seed},
         {"intrinsics", intrinsics_to_json(scene.intrinsics)},
         {"extrinsics", extrinsics_to_json(scene.extrinsics)},
         {"files",
          {{"img0", "img0.pgm"},
           {"img1", "img1.pgm"},
           {"depth0", "depth0.raw"},
           {"points", "points.csv"}}}};
  std::ofstream out(path);
  if (!out) throw ParseError(path, "cannot open file for writing");
  out << j.dump(2) << "\n";
  if (!out) throw ParseError(path, "write failed");
}

SceneFiles load_scene_json(const std::string& path) {
  const json j = load_json_file(path);
  SceneFiles s;
  try {
    s.s_true = j.at("s_true").get<double>();
    s.noise_sigma = j.value("noise_sigma", 0.0);
    s.seed = j.value("seed", std::uint64_t(0));
    s.calib.K0 = intrinsics_from_json(j.at("intrinsics"));
    s.calib.K1 = s.calib.K0;
    s.calib.extrinsics = extrinsics_from_json(j.at("extrinsics"));
    const auto& files = j.at("files");
    s.img0_file = files.at("img0").get<std::string>();
    s.img1_file = files.at("img1").get<std::string>();
    s.depth_file = files.at("depth0").get<std::string>();
    s.points_file = files.at("points").get<std::string>();
  } catch (const json::exception& e) {
    throw ParseError(path, "invalid scene sidecar: " + std::string(e.what()));
  }
  try {
    s.calib.K0.validate();
    s.calib.extrinsics.validate();
  } catch (const ConfigError& e) {
    throw ParseError(path, e.what());
  }
  return s;
}

SceneConfig load_scene_config(const std::string& path) {
  const json j = load_json_file(path);
  SceneConfig cfg;
  try {
    const auto& geom = j.at("geometry");
    const std::string kind = geom.at("type").get<std::string>();
    if (kind == "plane") {
      cfg.geometry = GeometryKind::fronto_plane;
      cfg.plane_depth = geom.at("depth").get<double>();
    } else if (kind == "inclined_plane") {
      cfg.geometry = GeometryKind::inclined_plane;
      const auto& n = geom.at("normal");
      cfg.plane_normal =
          Eigen::Vector3d(n.at(0).get<double>(), n.at(1).get<double>(), n.at(2).get<double>());
      cfg.plane_offset = geom.at("offset").get<double>();
    } else if (kind == "height_field") {
      cfg.geometry = GeometryKind::height_field;
      cfg.plane_depth = geom.at("depth").get<double>();
      cfg.field_amplitude = geom.at("amplitude").get<double>();
      cfg.field_period = geom.at("period").get<double>();
    } else {
      throw ParseError(path, "unknown geometry type '" + kind + "'");
    }

    const auto& tex = j.at("texture");
    const std::string tkind = tex.at("type").get<std::string>();
    if (tkind == "band_limited") {
      cfg.texture = TextureKind::band_limited;
    } else if (tkind == "sinusoid") {
      cfg.texture = TextureKind::sinusoid;
      cfg.texture_period_px = tex.at("period_px").get<double>();
    } else if (tkind == "checkerboard") {
      cfg.texture = TextureKind::checkerboard;
      cfg.texture_period_px = tex.at("period_px").get<double>();
    } else {
      throw ParseError(path, "unknown texture type '" + tkind + "'");
    }
    if (tex.contains("contrast")) cfg.texture_contrast = tex.at("contrast").get<double>();

    cfg.intrinsics = intrinsics_from_json(j.at("intrinsics"));
    cfg.extrinsics = extrinsics_from_json(j.at("extrinsics"));
    cfg.noise_sigma = j.value("noise_sigma", 0.0);
    cfg.s_true = j.value("s_true", 1.0);
    cfg.seed = j.value("seed", std::uint64_t(1));
  } catch (const json::exception& e) {
    throw ParseError(path, "invalid scene config: " + std::string(e.what()));
  }
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ParseError(path, e.what());
  }
  return cfg;
}

}  // namespace scaleopt
