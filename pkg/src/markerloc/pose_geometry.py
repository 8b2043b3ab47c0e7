"""Fiducial-marker pose geometry.

A downward chain of plain functions turns one marker detection, i.e. the
rotation matrix and translation vector of the marker relative to the camera,
into an absolute vehicle pose on the map:

1. the camera-marker relative yaw is read off the rotation matrix,
2. the camera translation is shifted by the camera's mounting offset on the
   vehicle to obtain the marker distance from the rear-axle point,
3. the marker's surveyed global position and orientation anchor the result.

All angles are degrees on the way in and out; the vehicle pose refers to the
center of the rear axle.  The inverse construction used by the simulator is
also provided so synthetic detections can be generated from a known pose.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .angles import DEG2RAD, RAD2DEG, wrap_degrees
from .errors import DegenerateGeometryError, InvalidRotationError


@dataclass
class CameraOffset:
    """Rigid mounting offset of the camera relative to the rear-axle point.

    lateral: sideways offset in meters (positive to the camera X side).
    longitudinal: forward offset in meters, non-negative.
    """

    lateral: float = 0.0
    longitudinal: float = 0.0

    def __post_init__(self):
        if self.longitudinal < 0.0:
            raise ValueError("longitudinal camera offset must be >= 0")


@dataclass
class MarkerSpec:
    """A surveyed fiducial marker: id, map position, facing heading.

    heading is the global heading (degrees) a vehicle has when it looks at
    the marker head-on, so a detection with zero relative yaw means the
    vehicle heading equals the marker heading.
    """

    marker_id: int
    x: float
    y: float
    heading: float

    def __post_init__(self):
        self.heading = wrap_degrees(self.heading)


@dataclass
class PoseMeasurement:
    """An absolute pose measurement decoded from one marker detection."""

    x: float
    y: float
    heading: float
    timestamp: float = 0.0
    marker_id: int = -1

    def __post_init__(self):
        self.heading = wrap_degrees(self.heading)

    def as_vector(self) -> np.ndarray:
        return np.array([self.x, self.y, self.heading], dtype=float)


def rotation_about_y(angle_deg: float) -> np.ndarray:
    """Rotation matrix for a right-handed rotation about the camera Y-axis."""
    c = math.cos(angle_deg * DEG2RAD)
    s = math.sin(angle_deg * DEG2RAD)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def validate_rotation(rotation: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Check that a 3x3 matrix is orthonormal with determinant +1.

    Returns the matrix as a float ndarray; raises InvalidRotationError when
    any entry of R^T R deviates from the identity by more than tol or the
    determinant is not +1 within tol.
    """
    r = np.asarray(rotation, dtype=float)
    if r.shape != (3, 3):
        raise InvalidRotationError(f"rotation must be 3x3, got {r.shape}")
    if not np.all(np.isfinite(r)):
        raise InvalidRotationError("rotation contains non-finite entries")
    err = np.abs(r.T @ r - np.eye(3)).max()
    if err > tol:
        raise InvalidRotationError(f"matrix is not orthonormal (max error {err:.3e})")
    det = float(np.linalg.det(r))
    if abs(det - 1.0) > max(tol, 1e-9):
        raise InvalidRotationError(f"determinant is {det:.12f}, expected +1")
    return r


def relative_yaw(rotation: np.ndarray, tol: float = 1e-9) -> float:
    """Relative yaw of the marker as seen by the camera, in degrees.

    The yaw is extracted from the first column of the rotation matrix as

        yaw = arctan(-r31 / sqrt(r32^2 + r33^2))

    which lands in (-90, 90): a marker must roughly face the camera to be
    detected at all.  The two gimbal poles map to exactly +-90.
    """
    r = validate_rotation(rotation, tol=tol)
    return math.atan2(-r[2, 0], math.hypot(r[2, 1], r[2, 2])) * RAD2DEG


def camera_distance(translation: np.ndarray, offset: CameraOffset) -> float:
    """Planar distance from the rear-axle point to the marker, in meters.

    translation is the (t1, t2, t3) camera-frame marker position: t1 lateral
    (camera X, right positive), t3 forward along the optical axis.  The
    vertical component t2 does not enter the planar distance.
    """
    t = np.asarray(translation, dtype=float)
    if t.shape != (3,):
        raise ValueError(f"translation must have shape (3,), got {t.shape}")
    if not np.all(np.isfinite(t)):
        raise ValueError("translation contains non-finite entries")
    return math.hypot(t[0] + offset.lateral, t[2] + offset.longitudinal)


def global_pose(
    rotation: np.ndarray,
    translation: np.ndarray,
    offset: CameraOffset,
    marker: MarkerSpec,
    timestamp: float = 0.0,
) -> PoseMeasurement:
    """Decode one marker detection into an absolute vehicle pose.

    The vehicle heading comes from the relative yaw plus the marker heading.
    The in-vehicle bearing of the marker is taken with a two-argument
    arctangent of (t1, t3 + longitudinal offset) so that detections behind
    the camera plane keep their quadrant instead of folding over.  The pose
    is the marker position pushed back along the world-frame bearing by the
    marker distance.

    Zero lateral and forward components leave the bearing unresolvable and
    raise DegenerateGeometryError; any other zero-distance detection (only
    reachable with a lateral camera offset) collapses to the marker
    position itself.
    """
    t = np.asarray(translation, dtype=float)
    yaw = relative_yaw(rotation)
    heading = wrap_degrees(yaw + marker.heading)
    d = camera_distance(t, offset)
    forward = t[2] + offset.longitudinal
    if t[0] == 0.0 and forward == 0.0:
        raise DegenerateGeometryError(
            "marker direction is unresolvable: zero lateral and forward components"
        )
    if d == 0.0:
        return PoseMeasurement(marker.x, marker.y, heading, timestamp, marker.marker_id)
    bearing_in_vehicle = math.atan2(t[0], forward) * RAD2DEG
    bearing_world = (heading - bearing_in_vehicle) * DEG2RAD
    x = marker.x - d * math.cos(bearing_world)
    y = marker.y - d * math.sin(bearing_world)
    return PoseMeasurement(x, y, heading, timestamp, marker.marker_id)


def marker_observation_inverse(
    x: float,
    y: float,
    heading: float,
    marker: MarkerSpec,
    offset: CameraOffset,
) -> tuple[np.ndarray, np.ndarray]:
    """Synthesize the (rotation, translation) a camera would report.

    Inverse of global_pose for a vehicle at (x, y, heading): the relative yaw
    is heading minus the marker heading, the marker distance and world
    bearing come from the displacement to the marker, and the camera-frame
    translation components are the distance resolved along the in-vehicle
    bearing.  Feeding the output back through global_pose reproduces the
    input pose to float round-off as long as the marker actually faces the
    camera (relative yaw inside (-90, 90)) and the camera sits on the
    vehicle centerline (zero lateral offset).

    The vertical translation component is reported as 0; the planar chain
    never reads it.
    """
    dx = marker.x - x
    dy = marker.y - y
    d = math.hypot(dx, dy)
    if d == 0.0:
        raise DegenerateGeometryError("vehicle is coincident with the marker")
    yaw = wrap_degrees(heading - marker.heading)
    bearing_world = math.atan2(dy, dx) * RAD2DEG
    bearing_in_vehicle = wrap_degrees(heading - bearing_world) * DEG2RAD
    t1 = d * math.sin(bearing_in_vehicle)
    t3 = d * math.cos(bearing_in_vehicle) - offset.longitudinal
    rotation = rotation_about_y(yaw)
    translation = np.array([t1, 0.0, t3])
    return rotation, translation
