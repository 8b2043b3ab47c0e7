"""Marker-aided indoor localization: simulation, fusion, evaluation.

The package follows the data path of a small differential-drive robot
localizing against wall-mounted fiducial markers: camera detections are
converted to global pose fixes, blended with gyro and wheel-encoder
dead reckoning by a family of Kalman filters, and scored against a
LiDAR-derived reference trajectory.
"""

from .angles import angle_difference, wrap_degrees, wrap_degrees_array
from .errors import (
    AmbiguousTargetError,
    ConfigError,
    DegenerateGeometryError,
    InfeasibleTrackError,
    InsufficientDataError,
    InvalidRotationError,
    LogParseError,
    MarkerLocError,
    NotInitializedError,
    NumericalFailureError,
)
from .evaluation import (
    ALPHA_GRID,
    RmseSeries,
    SweepResult,
    position_error,
    rmse,
    run_rmse,
    sweep_alpha,
)
from .fusion_filters import (
    CorrectionResult,
    FilterConfig,
    FilterMode,
    FilterRun,
    FusionFilter,
    chi_square,
    replay_log,
)
from .ground_truth_pipeline import (
    FitDiagnostics,
    LidarPoint,
    SphereExtraction,
    SphereSpec,
    extract_sphere_centers,
    fit_reference,
    partition_rings,
    read_lidar_csv,
)
from .pose_geometry import (
    CameraOffset,
    MarkerSpec,
    PoseMeasurement,
    camera_distance,
    global_pose,
    marker_observation_inverse,
    relative_yaw,
    rotation_about_y,
    validate_rotation,
)
from .sensor_log import (
    EncoderRecord,
    ImuRecord,
    MarkerRecord,
    SensorLog,
    read_log_csv,
    write_log_csv,
)
from .sensor_simulator import (
    BUILTIN_MAPS,
    CameraSpec,
    MapSpec,
    NoiseSpec,
    SensorRates,
    TruthTrajectory,
    crossroads_map,
    generate_truth,
    oval_map,
    synthesize_log,
    visible_markers,
    write_truth_csv,
)
from .trajectory import GroundTruthTrajectory
from .vehicle_dynamics import ControlInput, VehicleState

__version__ = "0.1.0"

__all__ = [
    "ALPHA_GRID",
    "AmbiguousTargetError",
    "BUILTIN_MAPS",
    "CameraOffset",
    "CameraSpec",
    "ConfigError",
    "ControlInput",
    "CorrectionResult",
    "DegenerateGeometryError",
    "EncoderRecord",
    "FilterConfig",
    "FilterMode",
    "FilterRun",
    "FitDiagnostics",
    "FusionFilter",
    "GroundTruthTrajectory",
    "ImuRecord",
    "InfeasibleTrackError",
    "InsufficientDataError",
    "InvalidRotationError",
    "LidarPoint",
    "LogParseError",
    "MapSpec",
    "MarkerLocError",
    "MarkerRecord",
    "MarkerSpec",
    "NoiseSpec",
    "NotInitializedError",
    "NumericalFailureError",
    "PoseMeasurement",
    "RmseSeries",
    "SensorLog",
    "SensorRates",
    "SphereExtraction",
    "SphereSpec",
    "SweepResult",
    "TruthTrajectory",
    "VehicleState",
    "angle_difference",
    "camera_distance",
    "chi_square",
    "crossroads_map",
    "extract_sphere_centers",
    "fit_reference",
    "generate_truth",
    "global_pose",
    "marker_observation_inverse",
    "oval_map",
    "partition_rings",
    "position_error",
    "read_lidar_csv",
    "read_log_csv",
    "relative_yaw",
    "replay_log",
    "rmse",
    "rotation_about_y",
    "run_rmse",
    "sweep_alpha",
    "synthesize_log",
    "validate_rotation",
    "visible_markers",
    "wrap_degrees",
    "wrap_degrees_array",
    "write_log_csv",
    "write_truth_csv",
]
