"""Reference-trajectory extraction from a spinning 16-ring LiDAR.

The tracked target is a sphere on a mast over the vehicle.  The scanner
sits still at the origin of the reference frame; its 16 beams fan out at
fixed elevations of -15 to +15 degrees in 2-degree steps.  The pipeline:

1. keep only the rings that can sweep the sphere,
2. chop the stream into fixed time windows, cluster each window's points
   with a single-link chain rule, and reject windows whose points form
   more than one well-separated cluster,
3. push each window's centroid outward along its sensor ray by one sphere
   radius: beams return the front surface, the center sits one radius
   deeper, so the corrected point's range is exactly the surface range
   plus the radius,
4. interpolate the corrected centers with a chord-length cubic spline.

Heights are carried through extraction for diagnostics, but the fitted
reference is planar.
"""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import AmbiguousTargetError, InsufficientDataError, LogParseError
from .trajectory import GroundTruthTrajectory

RING_ELEVATIONS_DEG = tuple(-15.0 + 2.0 * i for i in range(16))

CLUSTER_GAP = 0.15  # meters: single-link chain distance
DEFAULT_WINDOW = 0.1  # seconds


@dataclass
class LidarPoint:
    """One return: time, position in the scanner frame, ring index."""

    t: float
    x: float
    y: float
    z: float
    ring: int

    def elevation_deg(self) -> float:
        horizontal = np.hypot(self.x, self.y)
        return float(np.degrees(np.arctan2(self.z, horizontal)))

    def consistent_with_ring(self, tol_deg: float = 0.5) -> bool:
        return abs(self.elevation_deg() - RING_ELEVATIONS_DEG[self.ring]) <= tol_deg


@dataclass
class SphereSpec:
    """Tracked sphere: surface radius and mount height of its center."""

    radius: float
    mount_height: float = 0.0

    def __post_init__(self):
        if self.radius <= 0.0:
            raise ValueError("sphere radius must be positive")


@dataclass
class SphereExtraction:
    """Extracted center track plus per-window bookkeeping."""

    centers: np.ndarray  # (M, 4) rows (t, x, y, z)
    skipped_windows: list[tuple[int, str]] = field(default_factory=list)
    window_count: int = 0


def partition_rings(points: list[LidarPoint], keep) -> list[LidarPoint]:
    """Keep only returns from the given ring indices, preserving order."""
    wanted = set(keep)
    for ring in wanted:
        if not 0 <= ring < len(RING_ELEVATIONS_DEG):
            raise ValueError(f"ring index {ring} out of range 0..15")
    return [p for p in points if p.ring in wanted]


def _chain_clusters(coords: np.ndarray, gap: float) -> list[np.ndarray]:
    """Single-link clustering: points connect when within gap of any member."""
    n = len(coords)
    labels = -np.ones(n, dtype=int)
    current = 0
    for i in range(n):
        if labels[i] >= 0:
            continue
        stack = [i]
        labels[i] = current
        while stack:
            j = stack.pop()
            near = np.linalg.norm(coords - coords[j], axis=1) <= gap
            for k in np.nonzero(near)[0]:
                if labels[k] < 0:
                    labels[k] = current
                    stack.append(int(k))
        current += 1
    return [np.nonzero(labels == c)[0] for c in range(current)]


def extract_sphere_centers(
    points: list[LidarPoint],
    sphere: SphereSpec,
    window: float = DEFAULT_WINDOW,
    strict: bool = False,
) -> SphereExtraction:
    """Turn surface returns into time-stamped sphere centers.

    Points are assumed pre-filtered to the target (rings and height band).
    Windows with more than one well-separated cluster are ambiguous: they
    are reported in skipped_windows and produce no center, or raise
    AmbiguousTargetError when strict.  Empty windows are skipped silently.
    The radius correction is applied to each window centroid along its ray
    from the scanner origin and is exactly norm-additive.
    """
    if window <= 0.0:
        raise ValueError("window must be positive")
    if not points:
        return SphereExtraction(np.empty((0, 4)))
    buckets: dict[int, list[LidarPoint]] = {}
    for p in points:
        buckets.setdefault(int(np.floor(p.t / window)), []).append(p)

    rows = []
    skipped = []
    for index in sorted(buckets):
        bucket = buckets[index]
        coords = np.array([[p.x, p.y, p.z] for p in bucket])
        clusters = _chain_clusters(coords, CLUSTER_GAP)
        if len(clusters) > 1:
            if strict:
                raise AmbiguousTargetError(
                    f"window {index} holds {len(clusters)} well-separated clusters"
                )
            skipped.append((index, f"{len(clusters)} well-separated clusters"))
            continue
        centroid = coords.mean(axis=0)
        distance = float(np.linalg.norm(centroid))
        if distance == 0.0:
            skipped.append((index, "centroid at scanner origin"))
            continue
        center = centroid + sphere.radius * centroid / distance
        rows.append((float(np.mean([p.t for p in bucket])), *center))
    return SphereExtraction(
        centers=np.array(rows) if rows else np.empty((0, 4)),
        skipped_windows=skipped,
        window_count=len(buckets),
    )


@dataclass
class FitDiagnostics:
    """What went into a reference fit, for the report sidecar."""

    sample_count: int
    skipped_windows: list[tuple[int, str]]
    z_mean: float
    z_spread: float
    max_interpolation_residual: float


def fit_reference(
    extraction: SphereExtraction,
    floor_correction: bool = False,
) -> tuple[GroundTruthTrajectory, FitDiagnostics]:
    """Fit the planar reference spline through extracted centers.

    Needs at least 4 centers, else InsufficientDataError.  The vertical
    component never enters the fit; with floor_correction the reported
    z statistics are measured about the sphere's fitted mean height
    instead of raw values.
    """
    centers = extraction.centers
    if len(centers) < 4:
        raise InsufficientDataError(
            f"need at least 4 sphere centers to fit, got {len(centers)}"
        )
    times = centers[:, 0]
    xy = centers[:, 1:3]
    z = centers[:, 3]
    trajectory = GroundTruthTrajectory.from_samples(xy, times=times)
    fitted = trajectory.query(trajectory.params)
    residual = float(np.max(np.linalg.norm(fitted - trajectory.points, axis=1)))
    z_reference = float(np.mean(z)) if floor_correction else 0.0
    diagnostics = FitDiagnostics(
        sample_count=len(centers),
        skipped_windows=list(extraction.skipped_windows),
        z_mean=float(np.mean(z)),
        z_spread=float(np.max(z - z_reference) - np.min(z - z_reference)),
        max_interpolation_residual=residual,
    )
    return trajectory, diagnostics


def read_lidar_csv(path) -> list[LidarPoint]:
    """Parse ``t,x,y,z,ring`` rows; bad rows raise LogParseError with the
    1-based row number.  A header row and ``#`` comments are skipped."""
    points = []
    with open(Path(path), newline="") as handle:
        for row_number, line in enumerate(handle, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split(",")
            if fields[0] == "t":
                continue
            try:
                if len(fields) != 5:
                    raise ValueError(f"expected 5 fields, got {len(fields)}")
                points.append(
                    LidarPoint(
                        float(fields[0]), float(fields[1]), float(fields[2]),
                        float(fields[3]), int(fields[4]),
                    )
                )
            except ValueError as exc:
                raise LogParseError(row_number, str(exc)) from exc
    return points
