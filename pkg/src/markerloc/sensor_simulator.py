"""Deterministic sensor simulator for marker-aided localization scenarios.

A scenario is a map (extent, surveyed markers, reference track), a speed,
and a noise model.  Truth generation resamples the track polyline
by arc length and then integrates the single-track process model exactly,
so the produced states are step-consistent by construction: replaying the
stored yaw-rate/speed controls through the process model reproduces the
stored states bit for bit.

Log synthesis walks the truth at the inertial rate and emits gyro, encoder
and marker records.  All randomness flows from one seeded generator with a
fixed draw order per step (gyro bias increment, gyro noise, encoder noise,
then per visible marker: pose perturbation, outlier coin, outlier
direction), so identical seeds give byte-identical logs.
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .angles import DEG2RAD, RAD2DEG, wrap_degrees
from .errors import ConfigError, DegenerateGeometryError, InfeasibleTrackError
from .pose_geometry import CameraOffset, MarkerSpec, marker_observation_inverse
from .sensor_log import EncoderRecord, ImuRecord, MarkerRecord, SensorLog
from .trajectory import GroundTruthTrajectory
from .vehicle_dynamics import ControlInput, VehicleState, step

MIN_TURNING_RADIUS = 0.6  # meters, platform steering limit
MAX_SPEED = 2.0  # m/s, platform envelope
DEFAULT_TRACK_WIDTH = 0.26  # meters between the rear wheels


@dataclass
class MapSpec:
    """A surveyed map: rectangular extent, markers, closed reference track."""

    name: str
    extent: tuple[float, float]
    markers: list[MarkerSpec]
    track: np.ndarray  # (K, 2) closed polyline, first point equals last

    def __post_init__(self):
        self.track = np.asarray(self.track, dtype=float).reshape(-1, 2)

    def validate(self) -> "MapSpec":
        w, h = self.extent
        for m in self.markers:
            if not (-1e-9 <= m.x <= w + 1e-9 and -1e-9 <= m.y <= h + 1e-9):
                raise ConfigError(f"marker {m.marker_id} at ({m.x}, {m.y}) is outside the extent")
        if len(self.track) < 4:
            raise ConfigError("track needs at least 4 waypoints")
        if not np.allclose(self.track[0], self.track[-1], atol=1e-9):
            raise ConfigError("track must be closed: first and last waypoints differ")
        return self

    def markers_by_id(self) -> dict[int, MarkerSpec]:
        return {m.marker_id: m for m in self.markers}

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "extent": list(self.extent),
            "markers": [
                {"id": m.marker_id, "x": m.x, "y": m.y, "heading": m.heading}
                for m in self.markers
            ],
            "track": [[float(x), float(y)] for x, y in self.track],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MapSpec":
        try:
            markers = [
                MarkerSpec(int(m["id"]), float(m["x"]), float(m["y"]), float(m["heading"]))
                for m in data["markers"]
            ]
            spec = cls(
                name=str(data.get("name", "unnamed")),
                extent=(float(data["extent"][0]), float(data["extent"][1])),
                markers=markers,
                track=np.asarray(data["track"], dtype=float),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed map spec: {exc}") from exc
        return spec.validate()


@dataclass
class NoiseSpec:
    """Sensor noise model; all zeros gives a perfect log.

    sigma_x/sigma_y/sigma_heading perturb the pose a marker detection is
    synthesized from (meters, meters, degrees).  sigma_yaw_rate is gyro
    white noise (deg/s) on top of a bias random walk whose per-step
    increment is gyro_drift_rate * dt (deg/s).  sigma_speed is per-wheel
    encoder noise (m/s).  With probability outlier_prob a detection's
    position is displaced by exactly outlier_offset meters in a uniformly
    random direction.
    """

    sigma_x: float = 0.02
    sigma_y: float = 0.02
    sigma_heading: float = 0.1
    sigma_yaw_rate: float = 0.3
    gyro_drift_rate: float = 0.02
    sigma_speed: float = 0.02
    outlier_prob: float = 0.0
    outlier_offset: float = 0.5

    def __post_init__(self):
        for name in ("sigma_x", "sigma_y", "sigma_heading", "sigma_yaw_rate",
                     "gyro_drift_rate", "sigma_speed", "outlier_offset"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be >= 0")
        if not 0.0 <= self.outlier_prob <= 1.0:
            raise ValueError("outlier_prob must be in [0, 1]")

    @classmethod
    def noiseless(cls) -> "NoiseSpec":
        return cls(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)


@dataclass
class SensorRates:
    """Sampling rates in Hz; the camera cannot outpace the inertial rate."""

    imu_hz: float = 100.0
    encoder_hz: float = 100.0
    camera_hz: float = 30.0

    def __post_init__(self):
        if min(self.imu_hz, self.encoder_hz, self.camera_hz) <= 0.0:
            raise ValueError("all rates must be positive")
        if self.camera_hz > self.imu_hz + 1e-9:
            raise ValueError("camera_hz must not exceed imu_hz")


@dataclass
class CameraSpec:
    """Field of view (deg), detection range (m), mounting offset."""

    fov_deg: float = 60.0
    max_range: float = 3.0
    offset: CameraOffset = field(default_factory=lambda: CameraOffset(0.0, 0.36))


@dataclass
class TruthTrajectory:
    """Ground-truth states at the integration rate, step-consistent."""

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    heading: np.ndarray  # degrees
    speed: np.ndarray  # m/s, speed over [t_k, t_{k+1})
    yaw_rate: np.ndarray  # deg/s, applied over [t_k, t_{k+1})

    def __len__(self) -> int:
        return len(self.t)

    def state(self, k: int) -> VehicleState:
        return VehicleState(self.x[k], self.y[k], self.heading[k], self.speed[k])

    def points(self) -> np.ndarray:
        return np.column_stack([self.x, self.y])

    def reference(self) -> GroundTruthTrajectory:
        return GroundTruthTrajectory.from_samples(self.points(), times=self.t)


def _cumulative_length(points: np.ndarray) -> np.ndarray:
    chords = np.linalg.norm(np.diff(points, axis=0), axis=1)
    return np.concatenate([[0.0], np.cumsum(chords)])


def _point_at_arc(points: np.ndarray, cumulative: np.ndarray, s: np.ndarray) -> np.ndarray:
    x = np.interp(s, cumulative, points[:, 0])
    y = np.interp(s, cumulative, points[:, 1])
    return np.column_stack([x, y])


def minimum_circumradius(points: np.ndarray) -> float:
    """Smallest three-point circumradius over consecutive triples.

    Near-collinear triples count as straight (infinite radius).
    """
    best = math.inf
    for i in range(len(points) - 2):
        p0, p1, p2 = points[i], points[i + 1], points[i + 2]
        a = np.linalg.norm(p1 - p0)
        b = np.linalg.norm(p2 - p1)
        c = np.linalg.norm(p2 - p0)
        cross = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p1[1] - p0[1]) * (p2[0] - p0[0])
        area = 0.5 * abs(cross)
        if area < 1e-12:
            continue
        best = min(best, a * b * c / (4.0 * area))
    return best


def generate_truth(
    track,
    speed: float = 1.0,
    dt: float = 0.01,
    laps: float = 1.0,
) -> TruthTrajectory:
    """Integrate ground truth along a track at a target speed.

    track is a MapSpec or a (K, 2) waypoint polyline; an open polyline is
    traversed once end to end, a closed one for the given number of laps.
    The polyline is resampled at the arc positions the vehicle reaches each
    dt; headings and speeds are taken from the resulting chords and the
    states integrated through the process model, so the output satisfies
    the single-track step exactly.  Track curvature below the platform's
    minimum turning radius or speeds beyond its envelope raise
    InfeasibleTrackError.
    """
    points = track.track if isinstance(track, MapSpec) else np.asarray(track, dtype=float)
    points = points.reshape(-1, 2)
    if len(points) < 2:
        raise InfeasibleTrackError("track needs at least 2 waypoints")
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if not 0.0 < speed <= MAX_SPEED:
        raise InfeasibleTrackError(
            f"speed {speed} m/s is outside the platform envelope (0, {MAX_SPEED}]"
        )
    cumulative = _cumulative_length(points)
    total = float(cumulative[-1])
    if total <= 0.0:
        raise InfeasibleTrackError("track has zero length")
    closed = bool(np.allclose(points[0], points[-1], atol=1e-9))

    check = _point_at_arc(points, cumulative, np.arange(0.0, total, 0.05))
    if closed and len(check) >= 3:
        check = np.vstack([check, check[:2]])
    radius = minimum_circumradius(check)
    if radius < MIN_TURNING_RADIUS:
        raise InfeasibleTrackError(
            f"track needs a {radius:.3f} m turning radius, platform minimum is {MIN_TURNING_RADIUS}"
        )

    budget = laps * total if closed else total
    steps = int(math.floor(budget / (speed * dt) + 1e-9))
    arcs = speed * dt * np.arange(steps + 2)  # two extra geometric samples
    if closed:
        arcs = np.mod(arcs, total)
    else:
        arcs = np.minimum(arcs, total)
    geometry = _point_at_arc(points, cumulative, arcs)
    if not closed:
        # extend past the end along the final segment so trailing chords exist
        overshoot = speed * dt * np.arange(steps + 2) - total
        tail = points[-1] - points[-2]
        tail = tail / np.linalg.norm(tail)
        beyond = overshoot > 1e-12
        geometry[beyond] = points[-1] + overshoot[beyond, None] * tail

    chords = np.diff(geometry, axis=0)
    lengths = np.linalg.norm(chords, axis=1)
    headings = np.degrees(np.arctan2(chords[:, 1], chords[:, 0]))
    speeds = lengths / dt
    count = steps + 1  # states 0..steps
    yaw_rates = np.zeros(count)
    for k in range(count - 1):
        yaw_rates[k] = wrap_degrees(headings[k + 1] - headings[k]) / dt
    if count > 1:
        yaw_rates[count - 1] = yaw_rates[count - 2]

    xs = np.empty(count)
    ys = np.empty(count)
    hs = np.empty(count)
    vs = np.empty(count)
    state = VehicleState(geometry[0, 0], geometry[0, 1], headings[0], speeds[0])
    for k in range(count):
        xs[k], ys[k], hs[k], vs[k] = state.x, state.y, state.heading, state.speed
        if k < count - 1:
            control = ControlInput(yaw_rates[k], speeds[k + 1], dt)
            state = step(state, control)

    t = dt * np.arange(count)
    return TruthTrajectory(t, xs, ys, hs, vs, yaw_rates)


def visible_markers(
    state: VehicleState,
    map_spec: MapSpec,
    fov_deg: float = 60.0,
    max_range: float = 3.0,
) -> list[MarkerSpec]:
    """Markers the camera can detect from a pose, in map order.

    A marker is visible when it is within range of the vehicle point,
    within half the field of view of the heading, and actually faces the
    camera: the relative yaw between vehicle heading and marker heading
    stays inside (-90, 90), which is also what keeps the detection
    decodable.
    """
    half_fov = 0.5 * fov_deg
    out = []
    for marker in map_spec.markers:
        dx = marker.x - state.x
        dy = marker.y - state.y
        distance = math.hypot(dx, dy)
        if distance == 0.0 or distance > max_range:
            continue
        bearing = math.atan2(dy, dx) * RAD2DEG
        if abs(wrap_degrees(bearing - state.heading)) > half_fov:
            continue
        if abs(wrap_degrees(state.heading - marker.heading)) >= 90.0:
            continue
        out.append(marker)
    return out


def synthesize_log(
    truth: TruthTrajectory,
    map_spec: MapSpec,
    noise: NoiseSpec,
    rates: SensorRates,
    camera: CameraSpec | None = None,
    seed: int = 0,
    track_width: float = DEFAULT_TRACK_WIDTH,
) -> SensorLog:
    """Emit the sensor log a run along the truth would have produced.

    The truth must be sampled at the inertial rate (dt = 1/imu_hz).
    Encoder and camera records are emitted at the nearest truth steps to
    their nominal sample times.  Marker detections are synthesized through
    the observation inverse from the truth pose perturbed by the noise
    spec, so decoding a noiseless log returns the truth poses exactly.
    """
    camera = camera or CameraSpec()
    dt = 1.0 / rates.imu_hz
    count = len(truth)
    if count > 1:
        actual_dt = truth.t[1] - truth.t[0]
        if abs(actual_dt - dt) > 1e-9:
            raise ValueError(
                f"truth is sampled at dt={actual_dt}, inertial rate wants {dt}"
            )
    rng = np.random.default_rng(seed)

    encoder_every = max(1, int(round(rates.imu_hz / rates.encoder_hz)))
    frames = int(math.floor(truth.t[-1] * rates.camera_hz + 1e-9)) + 1
    camera_steps = {
        int(round(j * rates.imu_hz / rates.camera_hz)) for j in range(frames)
    }
    camera_steps = {k for k in camera_steps if k < count}

    records = []
    bias = 0.0
    half_width = 0.5 * track_width
    for k in range(count):
        t = float(truth.t[k])
        bias += rng.normal(0.0, noise.gyro_drift_rate * dt)
        measured = truth.yaw_rate[k] + bias + rng.normal(0.0, noise.sigma_yaw_rate)
        records.append(ImuRecord(t, float(measured)))
        if k % encoder_every == 0:
            split = truth.yaw_rate[k] * DEG2RAD * half_width
            left = truth.speed[k] - split + rng.normal(0.0, noise.sigma_speed)
            right = truth.speed[k] + split + rng.normal(0.0, noise.sigma_speed)
            records.append(EncoderRecord(t, float(left), float(right)))
        if k in camera_steps:
            state = truth.state(k)
            for marker in visible_markers(state, map_spec, camera.fov_deg, camera.max_range):
                x = state.x + rng.normal(0.0, noise.sigma_x)
                y = state.y + rng.normal(0.0, noise.sigma_y)
                heading = wrap_degrees(state.heading + rng.normal(0.0, noise.sigma_heading))
                if rng.random() < noise.outlier_prob:
                    direction = rng.uniform(0.0, 2.0 * math.pi)
                    x += noise.outlier_offset * math.cos(direction)
                    y += noise.outlier_offset * math.sin(direction)
                try:
                    rotation, translation = marker_observation_inverse(
                        x, y, heading, marker, camera.offset
                    )
                except DegenerateGeometryError:
                    continue  # perturbed pose landed on the marker; drop the detection
                records.append(MarkerRecord(t, marker.marker_id, rotation, translation))
    return SensorLog(records).validate()


def write_truth_csv(truth: TruthTrajectory, path, header_line: str | None = None) -> None:
    with open(path, "w", newline="") as handle:
        if header_line is not None:
            handle.write(header_line + "\n")
        handle.write("t,x,y,heading,speed,yaw_rate\n")
        for k in range(len(truth)):
            handle.write(
                ",".join(
                    str(v)
                    for v in (
                        truth.t[k], truth.x[k], truth.y[k],
                        truth.heading[k], truth.speed[k], truth.yaw_rate[k],
                    )
                )
                + "\n"
            )


def _ellipse_ring(center, a, b, count, start_fraction=0.0, resolution=8192):
    """Points and outward-normal headings equispaced by arc length."""
    theta = np.linspace(0.0, 2.0 * math.pi, resolution + 1)
    ring = np.column_stack(
        [center[0] + a * np.cos(theta), center[1] + b * np.sin(theta)]
    )
    cumulative = _cumulative_length(ring)
    total = cumulative[-1]
    positions = []
    headings = []
    for k in range(count):
        s = math.fmod((start_fraction + k / count) * total, total)
        point = _point_at_arc(ring, cumulative, np.array([s]))[0]
        angle = math.atan2(point[1] - center[1], point[0] - center[0])
        # outward normal of the ellipse, not the radial direction
        normal = math.atan2(math.sin(angle) / b, math.cos(angle) / a)
        positions.append(point)
        headings.append(normal * RAD2DEG)
    return positions, headings


def oval_map() -> MapSpec:
    """Bundled oval scenario map: 6 x 4 m extent, 12 boundary markers.

    Markers sit on the inscribed boundary ellipse facing inward; the
    reference track is a smaller concentric ellipse driven anti-clockwise.
    """
    center = (3.0, 2.0)
    positions, headings = _ellipse_ring(center, 3.0, 2.0, 12)
    markers = [
        MarkerSpec(i, float(p[0]), float(p[1]), h)
        for i, (p, h) in enumerate(zip(positions, headings))
    ]
    theta = np.linspace(0.0, 2.0 * math.pi, 241)
    track = np.column_stack(
        [center[0] + 2.4 * np.cos(theta), center[1] + 1.4 * np.sin(theta)]
    )
    track[-1] = track[0]
    return MapSpec("oval", (6.0, 4.0), markers, track).validate()


def crossroads_map() -> MapSpec:
    """Bundled crossroads scenario map: 8 x 6 m extent, 16 boundary markers.

    The reference track is a figure eight through the central crossing:
    the left loop anti-clockwise, the right loop clockwise, tangent-
    continuous at the junction.
    """
    center = (4.0, 3.0)
    positions, headings = _ellipse_ring(center, 4.0, 3.0, 16)
    markers = [
        MarkerSpec(i, float(p[0]), float(p[1]), h)
        for i, (p, h) in enumerate(zip(positions, headings))
    ]
    radius = 1.5
    left_theta = np.linspace(0.0, 2.0 * math.pi, 181)[:-1]
    left = np.column_stack(
        [2.5 + radius * np.cos(left_theta), 3.0 + radius * np.sin(left_theta)]
    )
    right_theta = np.linspace(math.pi, -math.pi, 181)[:-1]
    right = np.column_stack(
        [5.5 + radius * np.cos(right_theta), 3.0 + radius * np.sin(right_theta)]
    )
    track = np.vstack([left, right, left[:1]])
    return MapSpec("crossroads", (8.0, 6.0), markers, track).validate()


BUILTIN_MAPS = {"oval": oval_map, "crossroads": crossroads_map}
