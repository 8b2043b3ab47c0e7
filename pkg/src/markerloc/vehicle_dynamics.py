"""Kinematic single-track process model.

State is (x, y, heading, speed) for the rear-axle point: meters, degrees in
(-180, 180], meters per second.  One explicit-Euler step moves the position
along the previous heading at the previous speed, integrates the measured
yaw rate into the heading, and overwrites the speed with the measured wheel
speed.  The model is deliberately control-driven: yaw rate and speed come
straight from the gyro and encoders and carry no dynamics of their own.
"""

import math
from dataclasses import dataclass

import numpy as np

from .angles import DEG2RAD, wrap_degrees


@dataclass
class VehicleState:
    """Planar vehicle state: rear-axle position, heading (deg), speed (m/s)."""

    x: float
    y: float
    heading: float
    speed: float

    def __post_init__(self):
        self.heading = wrap_degrees(self.heading)

    def as_vector(self) -> np.ndarray:
        return np.array([self.x, self.y, self.heading, self.speed], dtype=float)

    @classmethod
    def from_vector(cls, vec: np.ndarray) -> "VehicleState":
        return cls(float(vec[0]), float(vec[1]), float(vec[2]), float(vec[3]))


@dataclass
class ControlInput:
    """One control sample: gyro yaw rate (deg/s), wheel speed (m/s), dt (s)."""

    yaw_rate: float
    speed: float
    dt: float

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")


def step(state: VehicleState, control: ControlInput) -> VehicleState:
    """Advance the state by one Euler step of length control.dt.

    Position advances with the trigonometry evaluated at the previous
    heading and previous speed; the heading then integrates the yaw rate and
    is wrapped; the speed is replaced by the measured wheel speed.
    """
    heading_rad = state.heading * DEG2RAD
    x = state.x + control.dt * state.speed * math.cos(heading_rad)
    y = state.y + control.dt * state.speed * math.sin(heading_rad)
    heading = wrap_degrees(state.heading + control.dt * control.yaw_rate)
    return VehicleState(x, y, heading, control.speed)


def jacobian(state: VehicleState, control: ControlInput) -> np.ndarray:
    """State Jacobian of step() at (state, control).

    The heading column carries the degree-to-radian factor so that F @ dx is
    consistent with the state storing its heading in degrees: the position
    rows differentiate cos/sin of (pi/180 * heading).  The heading and speed
    rows are identity rows; yaw rate and speed are treated as pure inputs.
    """
    heading_rad = state.heading * DEG2RAD
    dt_v = control.dt * state.speed
    c = math.cos(heading_rad)
    s = math.sin(heading_rad)
    return np.array(
        [
            [1.0, 0.0, -dt_v * s * DEG2RAD, control.dt * c],
            [0.0, 1.0, dt_v * c * DEG2RAD, control.dt * s],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )
