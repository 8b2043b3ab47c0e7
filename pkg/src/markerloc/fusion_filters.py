"""Extended Kalman filter variants for marker-aided dead reckoning.

One filter class covers the four operating modes:

- ``ekf``: classic predict/correct with fixed noise matrices.
- ``aekf``: after every accepted correction the process and measurement
  noise matrices are re-blended from the innovation and residual using
  per-matrix forgetting factors; factors of 1.0 recover the classic filter
  exactly.
- ``chi2``: corrections are gated on the innovation's chi-square statistic;
  a measurement whose statistic exceeds the threshold is dropped and the
  filter keeps dead reckoning.  A threshold of +inf recovers the classic
  filter exactly.
- ``aekf+chi2``: both of the above; rejected measurements trigger no
  adaptation.

The state is (x, y, heading, speed) with the heading in degrees, so the
covariance carries deg^2 in the heading block and the process Jacobian's
heading column includes the degree-to-radian factor.  Measurements are
absolute poses (x, y, heading) decoded from marker detections; the
measurement matrix is the constant [I3 | 0].

Covariance updates use the Joseph form, which keeps the posterior symmetric
positive semidefinite even with a strongly gated, adapted filter.  The
innovation covariance is factorized with a Cholesky decomposition; a factor
failure is reported as NumericalFailureError, never silently worked around.
"""

import enum
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .angles import wrap_degrees
from .errors import NotInitializedError, NumericalFailureError
from .pose_geometry import CameraOffset, MarkerSpec, PoseMeasurement, global_pose
from .sensor_log import EncoderRecord, ImuRecord, MarkerRecord, SensorLog
from .vehicle_dynamics import ControlInput, VehicleState, jacobian, step

MEASUREMENT_MATRIX = np.array(
    [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
    ]
)

DEFAULT_PROCESS_NOISE_DIAG = (1e-3, 1e-3, 3e-4, 2e-3)
DEFAULT_MEASUREMENT_NOISE_DIAG = (0.5, 0.5, 1.0)
DEFAULT_INITIAL_COVARIANCE_DIAG = (0.1, 0.1, 0.1, 0.1)
DEFAULT_GATE_THRESHOLD = 0.05


class FilterMode(str, enum.Enum):
    EKF = "ekf"
    AEKF = "aekf"
    CHI2 = "chi2"
    AEKF_CHI2 = "aekf+chi2"

    @property
    def adaptive(self) -> bool:
        return self in (FilterMode.AEKF, FilterMode.AEKF_CHI2)

    @property
    def gated(self) -> bool:
        return self in (FilterMode.CHI2, FilterMode.AEKF_CHI2)

    @property
    def slug(self) -> str:
        """Filesystem-safe name for output files."""
        return self.value.replace("+", "_")


def _validate_psd(name: str, matrix: np.ndarray, size: int) -> np.ndarray:
    m = np.asarray(matrix, dtype=float)
    if m.shape != (size, size):
        raise ValueError(f"{name} must be {size}x{size}, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    if np.abs(m - m.T).max() > 1e-9:
        raise ValueError(f"{name} must be symmetric")
    if np.linalg.eigvalsh(m).min() < -1e-9:
        raise ValueError(f"{name} must be positive semidefinite")
    return 0.5 * (m + m.T)


@dataclass
class FilterConfig:
    """Frozen tuning of one filter instance.

    The default noise matrices are the tuning used for all bundled
    scenarios; forgetting factors live in (0, 1] and the gate threshold is
    +inf unless the mode actually gates.
    """

    mode: FilterMode = FilterMode.EKF
    process_noise: np.ndarray = field(
        default_factory=lambda: np.diag(DEFAULT_PROCESS_NOISE_DIAG)
    )
    measurement_noise: np.ndarray = field(
        default_factory=lambda: np.diag(DEFAULT_MEASUREMENT_NOISE_DIAG)
    )
    initial_covariance: np.ndarray = field(
        default_factory=lambda: np.diag(DEFAULT_INITIAL_COVARIANCE_DIAG)
    )
    alpha_q: float = 1.0
    alpha_r: float = 1.0
    gate_threshold: float = math.inf

    def __post_init__(self):
        self.mode = FilterMode(self.mode)
        self.process_noise = _validate_psd("process_noise", self.process_noise, 4)
        self.measurement_noise = _validate_psd(
            "measurement_noise", self.measurement_noise, 3
        )
        self.initial_covariance = _validate_psd(
            "initial_covariance", self.initial_covariance, 4
        )
        for name, alpha in (("alpha_q", self.alpha_q), ("alpha_r", self.alpha_r)):
            if not 0.0 < alpha <= 1.0:
                raise ValueError(f"{name} must be in (0, 1], got {alpha}")
        if not self.gate_threshold > 0.0:
            raise ValueError(f"gate_threshold must be positive, got {self.gate_threshold}")

    @classmethod
    def defaults(cls, mode: FilterMode | str, **overrides) -> "FilterConfig":
        """Config with the bundled default tuning for the given mode.

        Gated modes get the default gate threshold; adaptive modes keep
        forgetting factors of 1.0 unless overridden.
        """
        mode = FilterMode(mode)
        if mode.gated:
            overrides.setdefault("gate_threshold", DEFAULT_GATE_THRESHOLD)
        return cls(mode=mode, **overrides)


def chi_square(innovation: np.ndarray, innovation_covariance: np.ndarray) -> float:
    """Chi-square statistic d^T S^-1 d of an innovation.

    S is factorized as SPD; a factorization failure (singular or non-finite
    S) raises NumericalFailureError.
    """
    d = np.asarray(innovation, dtype=float)
    s = np.asarray(innovation_covariance, dtype=float)
    try:
        factor = cho_factor(s, lower=True)
        return float(d @ cho_solve(factor, d))
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalFailureError(f"innovation covariance is not SPD: {exc}") from exc


@dataclass
class CorrectionResult:
    """Outcome of one correct() call."""

    accepted: bool
    innovation: np.ndarray
    chi_square: float
    residual: np.ndarray | None = None


class FusionFilter:
    """Mutable filter state machine: initialize once, then predict/correct.

    Attributes of interest between calls: ``state`` (VehicleState),
    ``covariance`` (4x4), ``process_noise`` and ``measurement_noise`` (the
    possibly adapted matrices), ``last_chi_square``, ``rejected_count`` and
    ``time_since_accept`` (seconds of dead reckoning since the last accepted
    correction).
    """

    def __init__(self, config: FilterConfig):
        self.config = config
        self.initialized = False
        self._x: np.ndarray | None = None
        self._P: np.ndarray | None = None
        self._Q = config.process_noise.copy()
        self._R = config.measurement_noise.copy()
        self.last_innovation: np.ndarray | None = None
        self.last_chi_square: float | None = None
        self.rejected_count = 0
        self.accepted_count = 0
        self.time_since_accept = 0.0

    @property
    def state(self) -> VehicleState:
        self._require_initialized()
        return VehicleState.from_vector(self._x)

    @property
    def state_vector(self) -> np.ndarray:
        self._require_initialized()
        return self._x.copy()

    @property
    def covariance(self) -> np.ndarray:
        self._require_initialized()
        return self._P.copy()

    @property
    def process_noise(self) -> np.ndarray:
        return self._Q.copy()

    @property
    def measurement_noise(self) -> np.ndarray:
        return self._R.copy()

    def _require_initialized(self):
        if not self.initialized:
            raise NotInitializedError(
                "filter has no state yet: feed it a first pose measurement"
            )

    def initialize(self, measurement: PoseMeasurement) -> None:
        """Seed the state from the first absolute pose; speed starts at 0."""
        self._x = np.array(
            [measurement.x, measurement.y, measurement.heading, 0.0]
        )
        self._P = self.config.initial_covariance.copy()
        self._Q = self.config.process_noise.copy()
        self._R = self.config.measurement_noise.copy()
        self.initialized = True
        self.time_since_accept = 0.0

    def predict(self, control: ControlInput) -> None:
        """Propagate state and covariance through one process-model step."""
        self._require_initialized()
        state = VehicleState.from_vector(self._x)
        f = jacobian(state, control)
        self._x = step(state, control).as_vector()
        self._P = f @ self._P @ f.T + self._Q
        self._P = 0.5 * (self._P + self._P.T)
        self.time_since_accept += control.dt

    def correct(self, measurement: PoseMeasurement) -> CorrectionResult:
        """Fuse one absolute pose measurement, applying the mode's policy.

        The innovation's heading component is wrapped before the chi-square
        statistic is formed.  In gated modes a statistic above the threshold
        leaves state, covariance and noise matrices untouched.  Adaptive
        modes re-blend the noise matrices after the state update, using the
        pre-update covariance for the measurement-noise term.
        """
        self._require_initialized()
        h = MEASUREMENT_MATRIX
        prior_p = self._P
        innovation = measurement.as_vector() - h @ self._x
        innovation[2] = wrap_degrees(innovation[2])
        s = h @ prior_p @ h.T + self._R
        s = 0.5 * (s + s.T)
        try:
            factor = cho_factor(s, lower=True)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise NumericalFailureError(
                f"innovation covariance is not SPD: {exc}"
            ) from exc
        statistic = float(innovation @ cho_solve(factor, innovation))
        self.last_innovation = innovation.copy()
        self.last_chi_square = statistic

        if self.config.mode.gated and statistic > self.config.gate_threshold:
            self.rejected_count += 1
            return CorrectionResult(False, innovation, statistic)

        gain = cho_solve(factor, h @ prior_p).T
        self._x = self._x + gain @ innovation
        self._x[2] = wrap_degrees(self._x[2])
        i_kh = np.eye(4) - gain @ h
        self._P = i_kh @ prior_p @ i_kh.T + gain @ self._R @ gain.T
        self._P = 0.5 * (self._P + self._P.T)

        residual = measurement.as_vector() - h @ self._x
        residual[2] = wrap_degrees(residual[2])
        if self.config.mode.adaptive:
            self.adapt(innovation, residual, gain, prior_p)
        self.accepted_count += 1
        self.time_since_accept = 0.0
        return CorrectionResult(True, innovation, statistic, residual)

    def adapt(
        self,
        innovation: np.ndarray,
        residual: np.ndarray,
        gain: np.ndarray,
        prior_covariance: np.ndarray,
    ) -> None:
        """Forgetting-factor update of the noise matrices.

        process_noise blends toward the innovation mapped through the gain,
        measurement_noise toward the residual outer product plus the
        measured part of the pre-update covariance.  Factors of 1.0 keep
        both matrices exactly unchanged.  An alpha_r below 1.0 folds every
        residual into the measurement noise, so on outlier-heavy logs the
        estimate can degrade sharply unless the gate screens those
        measurements first; the value stays configurable regardless.
        """
        a_q = self.config.alpha_q
        a_r = self.config.alpha_r
        kd = gain @ innovation
        self._Q = a_q * self._Q + (1.0 - a_q) * np.outer(kd, kd)
        h = MEASUREMENT_MATRIX
        hph = h @ prior_covariance @ h.T
        self._R = a_r * self._R + (1.0 - a_r) * (np.outer(residual, residual) + hph)


STEP_COLUMNS = (
    "t",
    "mode",
    "x",
    "y",
    "heading",
    "speed",
    "p_x",
    "p_y",
    "p_heading",
    "p_speed",
    "chi_square",
    "accepted",
)


@dataclass
class StepLogRow:
    """One diagnostics row: written for every filter operation."""

    t: float
    mode: str
    state: np.ndarray
    covariance_diag: np.ndarray
    chi_square: float | None
    accepted: bool | None

    def as_csv_fields(self) -> list[str]:
        fields = [str(self.t), self.mode]
        fields += [str(v) for v in self.state]
        fields += [str(v) for v in self.covariance_diag]
        fields.append("" if self.chi_square is None else str(self.chi_square))
        fields.append("" if self.accepted is None else str(int(self.accepted)))
        return fields


@dataclass
class FilterRun:
    """Result of replaying one sensor log through one filter config."""

    config: FilterConfig
    trajectory: np.ndarray  # rows (t, x, y, heading, speed) after each state change
    steps: list[StepLogRow]
    predict_count: int
    correct_count: int
    rejected_count: int
    mean_step_seconds: float
    max_step_seconds: float

    @property
    def final_state(self) -> np.ndarray:
        return self.trajectory[-1]


def replay_log(
    log: SensorLog,
    markers: dict[int, MarkerSpec],
    offset: CameraOffset,
    config: FilterConfig,
) -> FilterRun:
    """Run one filter over a sensor log in record order.

    Inertial and encoder records drive a predict step over the interval
    since the previous record time, holding the control samples cached at
    that interval's start, and then refresh the cache (records sharing a
    timestamp collapse into one step); marker records are decoded into
    absolute poses and drive corrections.
    The filter initializes from the first marker record; records before it
    only warm the control caches.  Per-record wall time is measured around
    the record's processing and reported as mean/max.
    """
    fusion = FusionFilter(config)
    mode = config.mode.value
    yaw_rate = 0.0
    speed = 0.0
    last_time = None
    trajectory_rows: list[tuple] = []
    steps: list[StepLogRow] = []
    predict_count = 0
    correct_count = 0
    durations: list[float] = []

    def snapshot(t: float, chi2: float | None, accepted: bool | None):
        steps.append(
            StepLogRow(t, mode, fusion._x.copy(), np.diag(fusion._P).copy(), chi2, accepted)
        )

    for record in log.records:
        began = time.perf_counter()
        if isinstance(record, (ImuRecord, EncoderRecord)):
            # A control sample holds from its timestamp to the next one, so
            # the interval ending at record.t is advanced with the previous
            # cache before this record replaces it.
            if fusion.initialized and record.t > last_time:
                fusion.predict(ControlInput(yaw_rate, speed, record.t - last_time))
                last_time = record.t
                predict_count += 1
                trajectory_rows.append((record.t, *fusion._x))
                snapshot(record.t, None, None)
            if isinstance(record, ImuRecord):
                yaw_rate = record.yaw_rate
            else:
                speed = 0.5 * (record.left + record.right)
        elif isinstance(record, MarkerRecord):
            marker = markers[record.marker_id]
            pose = global_pose(
                record.rotation, record.translation, offset, marker, record.t
            )
            if not fusion.initialized:
                fusion.initialize(pose)
                last_time = record.t
                trajectory_rows.append((record.t, *fusion._x))
                snapshot(record.t, None, None)
            else:
                result = fusion.correct(pose)
                correct_count += 1
                if result.accepted:
                    trajectory_rows.append((record.t, *fusion._x))
                snapshot(record.t, result.chi_square, result.accepted)
        durations.append(time.perf_counter() - began)

    trajectory = np.array(trajectory_rows) if trajectory_rows else np.empty((0, 5))
    return FilterRun(
        config=config,
        trajectory=trajectory,
        steps=steps,
        predict_count=predict_count,
        correct_count=correct_count,
        rejected_count=fusion.rejected_count,
        mean_step_seconds=float(np.mean(durations)) if durations else 0.0,
        max_step_seconds=float(np.max(durations)) if durations else 0.0,
    )
