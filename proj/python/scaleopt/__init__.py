"""Direct photometric scale optimization for stereo camera pairs."""

from ._core import (
    BruteForceResult,
    Calibration,
    CameraIntrinsics,
    ConfigError,
    EvalReport,
    GeometryKind,
    KeyframeBundle,
    LevelTrace,
    MatchConfig,
    MatchMetric,
    MatchResult,
    OptimizationError,
    OptimizerConfig,
    ParseError,
    PointWeightMode,
    ScalePoint,
    ScaleResult,
    SceneConfig,
    SegmentError,
    StereoExtrinsics,
    SyntheticScene,
    TextureKind,
    TrajectoryPose,
    apply_scale_correction,
    back_project,
    brute_force_scale,
    energy,
    epipolar_match,
    gn_step,
    huber_energy,
    huber_weight,
    jacobian_scale,
    load_image,
    load_kitti_calib,
    load_trajectory,
    make_bundle,
    optimize_scale,
    project,
    project_scaled,
    relative_errors,
    render_scene,
    residual,
    sample_points,
    save_pgm,
    save_trajectory,
    scale_from_matches,
    set_num_threads,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
