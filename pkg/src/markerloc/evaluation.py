"""Trajectory accuracy metrics and the forgetting-factor grid sweep.

Fused trajectories and reference trajectories live on different clocks, so
the default error measure is association-free: each fused sample scores
its Euclidean distance to the nearest point on the reference spline.  When
the clocks are actually aligned (a known constant offset), timestamp
association can be requested instead.

The sweep runs the adaptive filter over one fixed sensor log for every
pair of forgetting factors on a regular grid in (0, 1] and reports the
final RMSE per cell.  A diverging cell (non-finite state or a failed
innovation factorization) scores +inf instead of aborting the sweep.
"""

import concurrent.futures
import math
import multiprocessing
from dataclasses import dataclass

import numpy as np

from .errors import NumericalFailureError
from .fusion_filters import FilterConfig, FilterMode, FilterRun, replay_log
from .pose_geometry import CameraOffset, MarkerSpec
from .sensor_log import SensorLog
from .trajectory import GroundTruthTrajectory


def position_error(
    estimate: np.ndarray,
    reference: GroundTruthTrajectory,
    time_offset: float | None = None,
) -> np.ndarray:
    """Per-sample position error of an estimated trajectory.

    estimate rows are (t, x, y, ...); only the first three columns are
    read.  By default each point scores its distance to the nearest point
    on the reference spline.  With a time_offset, sample times shifted by
    it are looked up on the reference clock instead.
    """
    est = np.asarray(estimate, dtype=float)
    if est.ndim != 2 or est.shape[1] < 3:
        raise ValueError("estimate must be rows of (t, x, y, ...)")
    points = est[:, 1:3]
    if time_offset is None:
        return reference.nearest_distances(points)
    matched = reference.query_time(est[:, 0] + time_offset)
    return np.linalg.norm(points - matched, axis=1)


@dataclass
class RmseSeries:
    """Cumulative root-mean-square error over a sample sequence."""

    cumulative: np.ndarray
    final: float

    def __len__(self) -> int:
        return len(self.cumulative)


def rmse(errors: np.ndarray) -> RmseSeries:
    """Cumulative RMSE series of an error sequence; final is the last value."""
    e = np.asarray(errors, dtype=float)
    if e.size == 0:
        raise ValueError("cannot compute RMSE of an empty error sequence")
    counts = np.arange(1, e.size + 1, dtype=float)
    series = np.sqrt(np.cumsum(e * e) / counts)
    return RmseSeries(series, float(series[-1]))


def run_rmse(run: FilterRun, reference: GroundTruthTrajectory) -> float:
    """Final nearest-point RMSE of one filter run; +inf when diverged."""
    if len(run.trajectory) == 0 or not np.all(np.isfinite(run.trajectory)):
        return math.inf
    return rmse(position_error(run.trajectory, reference)).final


ALPHA_GRID = tuple((k + 1) / 10 for k in range(10))


@dataclass
class SweepResult:
    """Forgetting-factor grid sweep outcome."""

    alpha_q_values: tuple
    alpha_r_values: tuple
    rmse_grid: np.ndarray  # (len(aq), len(ar))
    best_alpha_q: float
    best_alpha_r: float
    best_rmse: float

    def rows(self):
        """Yield (alpha_q, alpha_r, rmse) in grid order."""
        for i, aq in enumerate(self.alpha_q_values):
            for j, ar in enumerate(self.alpha_r_values):
                yield aq, ar, float(self.rmse_grid[i, j])


# shared inputs for _cell_rmse; forked sweep workers inherit it
_sweep_context = None


def _cell_rmse(pair) -> float:
    log, markers, offset, reference, base = _sweep_context
    alpha_q, alpha_r = pair
    config = FilterConfig(
        mode=FilterMode.AEKF,
        process_noise=base.process_noise.copy(),
        measurement_noise=base.measurement_noise.copy(),
        initial_covariance=base.initial_covariance.copy(),
        alpha_q=alpha_q,
        alpha_r=alpha_r,
        gate_threshold=base.gate_threshold,
    )
    try:
        return run_rmse(replay_log(log, markers, offset, config), reference)
    except NumericalFailureError:
        return math.inf


def sweep_alpha(
    log: SensorLog,
    markers: dict[int, MarkerSpec],
    offset: CameraOffset,
    reference: GroundTruthTrajectory,
    base_config: FilterConfig | None = None,
    grid=ALPHA_GRID,
    workers: int | None = None,
) -> SweepResult:
    """Run the adaptive filter once per forgetting-factor pair.

    Cells are mutually independent replays of the same log, so they may
    run in any order; with workers > 1 they run in a forked process pool
    and assemble into the same grid the serial path produces.  Ties for
    the best cell break toward larger factors, i.e. toward the classic
    filter.  Zero is excluded from the grid: a zero factor would discard
    the noise history entirely and is outside the filter's contract.
    """
    global _sweep_context
    base = base_config or FilterConfig.defaults(FilterMode.AEKF)
    grid = tuple(grid)
    pairs = [(alpha_q, alpha_r) for alpha_q in grid for alpha_r in grid]
    _sweep_context = (log, markers, offset, reference, base)
    try:
        parallel = (
            workers is not None
            and workers > 1
            and "fork" in multiprocessing.get_all_start_methods()
        )
        if parallel:
            pool_context = multiprocessing.get_context("fork")
            with concurrent.futures.ProcessPoolExecutor(
                max_workers=workers, mp_context=pool_context
            ) as pool:
                values = list(pool.map(_cell_rmse, pairs, chunksize=5))
        else:
            values = [_cell_rmse(pair) for pair in pairs]
    finally:
        _sweep_context = None
    rmse_grid = np.array(values).reshape(len(grid), len(grid))
    best = (math.inf, None, None)
    for (alpha_q, alpha_r), value in zip(pairs, values):
        if value <= best[0]:
            best = (value, alpha_q, alpha_r)
    return SweepResult(grid, grid, rmse_grid, best[1], best[2], best[0])
