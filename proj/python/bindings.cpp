#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <scaleopt/errors.hpp>
#include <scaleopt/evaluation.hpp>
#include <scaleopt/image_io.hpp>
#include <scaleopt/io.hpp>
#include <scaleopt/parallel.hpp>
#include <scaleopt/scale_optimizer.hpp>
#include <scaleopt/stereo_baseline.hpp>
#include <scaleopt/synthetic.hpp>

namespace py = pybind11;
using namespace scaleopt;

namespace {

py::array_t<double> image_to_array(const GrayImage& img) {
  py::array_t<double> arr({img.height, img.width});
  std::copy(img.data.begin(), img.data.end(), arr.mutable_data());
  return arr;
}

GrayImage array_to_image(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
  if (arr.ndim() != 2) throw ConfigError("image array must be 2-D (height, width)");
  GrayImage img(static_cast<int>(arr.shape(1)), static_cast<int>(arr.shape(0)));
  std::copy(arr.data(), arr.data() + arr.size(), img.data.begin());
  return img;
}

py::array_t<float> depth_to_array(const SyntheticScene& scene) {
  py::array_t<float> arr({scene.img0.height, scene.img0.width});
  std::copy(scene.depth0.begin(), scene.depth0.end(), arr.mutable_data());
  return arr;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Direct photometric scale optimization for stereo camera pairs";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<OptimizationError>(m, "OptimizationError", PyExc_RuntimeError);

  m.def("set_num_threads", &set_num_threads, py::arg("n"));

  // geometry ---------------------------------------------------------------
  py::class_<CameraIntrinsics>(m, "CameraIntrinsics")
      .def(py::init([](double fx, double fy, double cx, double cy, int width, int height) {
             CameraIntrinsics K{fx, fy, cx, cy, width, height};
             K.validate();
             return K;
           }),
           py::arg("fx"), py::arg("fy"), py::arg("cx"), py::arg("cy"), py::arg("width"),
           py::arg("height"))
      .def_readonly("fx", &CameraIntrinsics::fx)
      .def_readonly("fy", &CameraIntrinsics::fy)
      .def_readonly("cx", &CameraIntrinsics::cx)
      .def_readonly("cy", &CameraIntrinsics::cy)
      .def_readonly("width", &CameraIntrinsics::width)
      .def_readonly("height", &CameraIntrinsics::height)
      .def("at_level", &CameraIntrinsics::at_level, py::arg("level"));

  py::class_<StereoExtrinsics>(m, "StereoExtrinsics")
      .def(py::init([](const Eigen::Matrix3d& R, const Eigen::Vector3d& t) {
             StereoExtrinsics T{R, t};
             T.validate();
             return T;
           }),
           py::arg("rotation"), py::arg("translation"))
      .def_static("rectified", &StereoExtrinsics::rectified, py::arg("baseline"))
      .def_readonly("rotation", &StereoExtrinsics::rotation)
      .def_readonly("translation", &StereoExtrinsics::translation);

  m.def("back_project", &back_project, py::arg("pixel"), py::arg("inv_depth"), py::arg("K"));
  m.def("project", &project, py::arg("point"), py::arg("K"));
  m.def(
      "project_scaled",
      [](const Pixel& p, double inv_depth, double s, const StereoExtrinsics& T,
         const CameraIntrinsics& K0, const CameraIntrinsics& K1)
          -> std::optional<std::pair<Pixel, Point3>> {
        const auto proj = project_scaled(p, inv_depth, s, T, K0, K1);
        if (!proj) return std::nullopt;
        return std::make_pair(proj->pixel, proj->rotated);
      },
      py::arg("pixel"), py::arg("inv_depth"), py::arg("s"), py::arg("T"), py::arg("K0"),
      py::arg("K1"), "Returns (pixel, rotated_point) or None when behind the camera");
  m.def("jacobian_scale", &jacobian_scale, py::arg("rotated"), py::arg("s"), py::arg("T"),
        py::arg("K1"));

  // optimizer --------------------------------------------------------------
  py::class_<ScalePoint>(m, "ScalePoint")
      .def(py::init([](const Pixel& px, double inv_depth, double host_intensity) {
             return ScalePoint{px, inv_depth, host_intensity};
           }),
           py::arg("host_pixel"), py::arg("inv_depth"), py::arg("host_intensity") = 0.0)
      .def_readwrite("host_pixel", &ScalePoint::host_pixel)
      .def_readwrite("inv_depth", &ScalePoint::inv_depth)
      .def_readwrite("host_intensity", &ScalePoint::host_intensity);

  py::class_<KeyframeBundle>(m, "KeyframeBundle")
      .def_property_readonly("num_points",
                             [](const KeyframeBundle& b) { return b.points.size(); })
      .def_readonly("points", &KeyframeBundle::points)
      .def_readonly("extrinsics", &KeyframeBundle::extrinsics);

  m.def(
      "make_bundle",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& img0,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& img1,
         const CameraIntrinsics& K0, const CameraIntrinsics& K1, const StereoExtrinsics& T,
         const std::vector<ScalePoint>& points, int levels) {
        return make_bundle(array_to_image(img0), array_to_image(img1), K0, K1, T, points,
                           levels);
      },
      py::arg("img0"), py::arg("img1"), py::arg("K0"), py::arg("K1"), py::arg("extrinsics"),
      py::arg("points"), py::arg("levels") = 4);

  py::enum_<PointWeightMode>(m, "PointWeightMode")
      .value("constant", PointWeightMode::constant)
      .value("gradient_weighted", PointWeightMode::gradient_weighted);

  py::class_<OptimizerConfig>(m, "OptimizerConfig")
      .def(py::init<>())
      .def_readwrite("levels", &OptimizerConfig::levels)
      .def_readwrite("max_iterations_per_level", &OptimizerConfig::max_iterations_per_level)
      .def_readwrite("convergence_tol", &OptimizerConfig::convergence_tol)
      .def_readwrite("huber_gamma", &OptimizerConfig::huber_gamma)
      .def_readwrite("min_valid_points", &OptimizerConfig::min_valid_points)
      .def_readwrite("min_valid_fraction", &OptimizerConfig::min_valid_fraction)
      .def_readwrite("weight_mode", &OptimizerConfig::weight_mode)
      .def_readwrite("constant_weight", &OptimizerConfig::constant_weight)
      .def_readwrite("gradient_weight_c", &OptimizerConfig::gradient_weight_c);

  py::class_<LevelTrace>(m, "LevelTrace")
      .def_readonly("level", &LevelTrace::level)
      .def_readonly("iterations", &LevelTrace::iterations)
      .def_readonly("final_energy", &LevelTrace::final_energy)
      .def_readonly("valid_count", &LevelTrace::valid_count)
      .def_readonly("reached_tolerance", &LevelTrace::reached_tolerance)
      .def_readonly("iteration_energies", &LevelTrace::iteration_energies);

  py::class_<ScaleResult>(m, "ScaleResult")
      .def_readonly("scale", &ScaleResult::scale)
      .def_readonly("initial_scale", &ScaleResult::initial_scale)
      .def_readonly("converged", &ScaleResult::converged)
      .def_readonly("valid_fraction", &ScaleResult::valid_fraction)
      .def_readonly("trace", &ScaleResult::trace)
      .def("__repr__", [](const ScaleResult& r) {
        return "ScaleResult(scale=" + std::to_string(r.scale) +
               ", converged=" + (r.converged ? "True" : "False") + ")";
      });

  m.def("huber_energy", &huber_energy, py::arg("r"), py::arg("gamma"));
  m.def("huber_weight", &huber_weight, py::arg("r"), py::arg("gamma"));
  m.def("residual", &residual, py::arg("point"), py::arg("s"), py::arg("bundle"),
        py::arg("level") = 0);
  m.def("energy", &energy, py::arg("bundle"), py::arg("s"), py::arg("level"), py::arg("config"));
  m.def("gn_step", &gn_step, py::arg("bundle"), py::arg("s"), py::arg("level"),
        py::arg("config"));
  m.def("optimize_scale", &optimize_scale, py::arg("bundle"), py::arg("s0"), py::arg("config"),
        py::call_guard<py::gil_scoped_release>());

  // synthetic --------------------------------------------------------------
  py::enum_<GeometryKind>(m, "GeometryKind")
      .value("fronto_plane", GeometryKind::fronto_plane)
      .value("inclined_plane", GeometryKind::inclined_plane)
      .value("height_field", GeometryKind::height_field);

  py::enum_<TextureKind>(m, "TextureKind")
      .value("band_limited", TextureKind::band_limited)
      .value("sinusoid", TextureKind::sinusoid)
      .value("checkerboard", TextureKind::checkerboard);

  py::class_<SceneConfig>(m, "SceneConfig")
      .def(py::init<>())
      .def_readwrite("geometry", &SceneConfig::geometry)
      .def_readwrite("plane_depth", &SceneConfig::plane_depth)
      .def_readwrite("plane_normal", &SceneConfig::plane_normal)
      .def_readwrite("plane_offset", &SceneConfig::plane_offset)
      .def_readwrite("field_amplitude", &SceneConfig::field_amplitude)
      .def_readwrite("field_period", &SceneConfig::field_period)
      .def_readwrite("texture", &SceneConfig::texture)
      .def_readwrite("texture_period_px", &SceneConfig::texture_period_px)
      .def_readwrite("texture_contrast", &SceneConfig::texture_contrast)
      .def_readwrite("intrinsics", &SceneConfig::intrinsics)
      .def_readwrite("extrinsics", &SceneConfig::extrinsics)
      .def_readwrite("noise_sigma", &SceneConfig::noise_sigma)
      .def_readwrite("s_true", &SceneConfig::s_true)
      .def_readwrite("seed", &SceneConfig::seed);

  py::class_<SyntheticScene>(m, "SyntheticScene")
      .def_property_readonly("img0", [](const SyntheticScene& s) { return image_to_array(s.img0); })
      .def_property_readonly("img1", [](const SyntheticScene& s) { return image_to_array(s.img1); })
      .def_property_readonly("depth0", &depth_to_array)
      .def_readonly("s_true", &SyntheticScene::s_true)
      .def_readonly("intrinsics", &SyntheticScene::intrinsics)
      .def_readonly("extrinsics", &SyntheticScene::extrinsics)
      .def_readonly("seed", &SyntheticScene::seed);

  m.def("render_scene", &render_scene, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("sample_points", &sample_points, py::arg("scene"), py::arg("n"),
        py::arg("inv_depth_noise") = 0.0, py::arg("seed") = 1);

  py::class_<BruteForceResult>(m, "BruteForceResult")
      .def_readonly("scales", &BruteForceResult::scales)
      .def_readonly("energies", &BruteForceResult::energies)
      .def_readonly("best_scale", &BruteForceResult::best_scale)
      .def_readonly("best_index", &BruteForceResult::best_index);

  m.def("brute_force_scale", &brute_force_scale, py::arg("bundle"), py::arg("s_lo"),
        py::arg("s_hi"), py::arg("steps"), py::arg("config"),
        py::call_guard<py::gil_scoped_release>());

  // stereo baseline ----------------------------------------------------------
  py::enum_<MatchMetric>(m, "MatchMetric")
      .value("ssd", MatchMetric::ssd)
      .value("ncc", MatchMetric::ncc);

  py::class_<MatchConfig>(m, "MatchConfig")
      .def(py::init<>())
      .def_readwrite("patch_radius", &MatchConfig::patch_radius)
      .def_readwrite("search_min", &MatchConfig::search_min)
      .def_readwrite("search_max", &MatchConfig::search_max)
      .def_readwrite("metric", &MatchConfig::metric)
      .def_readwrite("uniqueness_ratio", &MatchConfig::uniqueness_ratio);

  py::class_<MatchResult>(m, "MatchResult")
      .def_readonly("accepted", &MatchResult::accepted)
      .def_readonly("disparity", &MatchResult::disparity)
      .def_readonly("cost_ratio", &MatchResult::cost_ratio);

  m.def(
      "epipolar_match",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& img0,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& img1,
         const Pixel& p, const MatchConfig& cfg) {
        return epipolar_match(array_to_image(img0), array_to_image(img1), p, cfg);
      },
      py::arg("img0"), py::arg("img1"), py::arg("pixel"), py::arg("config"));
  m.def("scale_from_matches", &scale_from_matches, py::arg("points"), py::arg("matches"),
        py::arg("fx"), py::arg("baseline"));

  // io / evaluation ----------------------------------------------------------
  py::class_<Calibration>(m, "Calibration")
      .def_readonly("K0", &Calibration::K0)
      .def_readonly("K1", &Calibration::K1)
      .def_readonly("extrinsics", &Calibration::extrinsics);

  m.def("load_kitti_calib", &load_kitti_calib, py::arg("path"), py::arg("width"),
        py::arg("height"));
  m.def(
      "load_image",
      [](const std::string& path) { return image_to_array(load_image(path)); },
      py::arg("path"));
  m.def(
      "save_pgm",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& img,
         const std::string& path, int max_value) {
        save_pgm(array_to_image(img), path, max_value);
      },
      py::arg("image"), py::arg("path"), py::arg("max_value") = 65535);

  py::class_<TrajectoryPose>(m, "TrajectoryPose")
      .def(py::init([](const Eigen::Matrix<double, 3, 4>& mat) {
             TrajectoryPose p;
             p.matrix = mat;
             return p;
           }),
           py::arg("matrix"))
      .def_readwrite("matrix", &TrajectoryPose::matrix);

  m.def("load_trajectory", &load_trajectory, py::arg("path"));
  m.def("save_trajectory", &save_trajectory, py::arg("poses"), py::arg("path"));

  py::class_<SegmentError>(m, "SegmentError")
      .def_readonly("length", &SegmentError::length)
      .def_readonly("translational_pct", &SegmentError::translational_pct)
      .def_readonly("rotational_deg_per_100m", &SegmentError::rotational_deg_per_100m)
      .def_readonly("segment_count", &SegmentError::segment_count);

  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("per_length", &EvalReport::per_length)
      .def_readonly("overall", &EvalReport::overall);

  m.def("relative_errors", &relative_errors, py::arg("gt"), py::arg("est"), py::arg("lengths"));
  m.def("apply_scale_correction", &apply_scale_correction, py::arg("poses"), py::arg("scales"),
        py::arg("keyframe_indices"));
}
