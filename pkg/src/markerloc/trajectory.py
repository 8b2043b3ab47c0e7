"""Reference trajectories: chord-length cubic splines over planar samples.

Both the sensor simulator (perfect knowledge) and the LiDAR pipeline
(extracted sphere centers) reduce to the same artifact: a sequence of
time-stamped planar points and a smooth curve through them.  The curve is a
natural cubic spline in each coordinate over the cumulative chord length,
which interpolates every sample and is C2-continuous between them.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.spatial import cKDTree

from .errors import InsufficientDataError


@dataclass
class GroundTruthTrajectory:
    """Planar reference path: samples, chord-length parameters, splines.

    times may be None when the parameterization is purely spatial.
    """

    points: np.ndarray  # (N, 2)
    params: np.ndarray  # (N,) cumulative chord length, strictly increasing
    times: np.ndarray | None = None
    _x_spline: CubicSpline = field(repr=False, default=None)
    _y_spline: CubicSpline = field(repr=False, default=None)

    @classmethod
    def from_samples(cls, points: np.ndarray, times=None) -> "GroundTruthTrajectory":
        """Fit the spline through samples; consecutive duplicates collapse.

        Needs at least 4 distinct samples, else InsufficientDataError.
        """
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        t = None if times is None else np.asarray(times, dtype=float)
        if len(pts) > 1:
            chord = np.linalg.norm(np.diff(pts, axis=0), axis=1)
            keep = np.concatenate([[True], chord > 0.0])
            pts = pts[keep]
            if t is not None:
                t = t[keep]
        if len(pts) < 4:
            raise InsufficientDataError(
                f"need at least 4 distinct samples to fit a spline, got {len(pts)}"
            )
        chord = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        params = np.concatenate([[0.0], np.cumsum(chord)])
        x_spline = CubicSpline(params, pts[:, 0], bc_type="natural")
        y_spline = CubicSpline(params, pts[:, 1], bc_type="natural")
        return cls(pts, params, t, x_spline, y_spline)

    @property
    def length(self) -> float:
        return float(self.params[-1])

    def query(self, param) -> np.ndarray:
        """Evaluate the spline at chord-length parameter(s); returns (..., 2)."""
        u = np.asarray(param, dtype=float)
        return np.stack([self._x_spline(u), self._y_spline(u)], axis=-1)

    def query_time(self, t) -> np.ndarray:
        """Evaluate at time(s) via linear time-to-parameter interpolation."""
        if self.times is None:
            raise ValueError("trajectory has no timestamps")
        u = np.interp(np.asarray(t, dtype=float), self.times, self.params)
        return self.query(u)

    def sample(self, resolution: int = 4096) -> np.ndarray:
        """Evaluate on a dense uniform parameter grid; returns (resolution+1, 2)."""
        grid = np.linspace(0.0, self.length, resolution + 1)
        return self.query(grid)

    def nearest_distances(self, queries: np.ndarray, resolution: int = 4096) -> np.ndarray:
        """Distance from each query point to the nearest point on the spline.

        The spline is sampled densely, the nearest vertex found through a
        KD-tree, and the result refined by exact projection onto the
        polyline segments adjacent to that vertex.
        """
        q = np.asarray(queries, dtype=float).reshape(-1, 2)
        dense = self.sample(resolution)
        tree = cKDTree(dense)
        _, idx = tree.query(q)
        out = np.empty(len(q))
        last = len(dense) - 1
        for i, (point, j) in enumerate(zip(q, idx)):
            best = np.inf
            for a in (max(j - 1, 0), min(j, last - 1)):
                best = min(best, _segment_distance(point, dense[a], dense[a + 1]))
            out[i] = best
        return out


def _segment_distance(point: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    """Euclidean distance from a point to the segment [a, b]."""
    ab = b - a
    denominator = float(ab @ ab)
    if denominator == 0.0:
        return float(np.linalg.norm(point - a))
    s = float((point - a) @ ab) / denominator
    s = min(1.0, max(0.0, s))
    return float(np.linalg.norm(point - (a + s * ab)))
