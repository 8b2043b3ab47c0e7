"""Degree-based angle helpers.

Angles cross every public interface of this package in degrees, with zero
along the world X-axis and anti-clockwise positive.  Trigonometry happens in
radians internally; wrapping is applied after every additive composition so
that stored headings stay inside (-180, 180].
"""

import math

import numpy as np

DEG2RAD = math.pi / 180.0
RAD2DEG = 180.0 / math.pi


def wrap_degrees(angle: float) -> float:
    """Wrap a scalar angle in degrees to the interval (-180, 180]."""
    a = math.fmod(angle, 360.0)
    if a <= -180.0:
        a += 360.0
    elif a > 180.0:
        a -= 360.0
    return a


def wrap_degrees_array(angles: np.ndarray) -> np.ndarray:
    """Vectorized wrap to (-180, 180]."""
    a = np.mod(np.asarray(angles, dtype=float), 360.0)
    return np.where(a > 180.0, a - 360.0, a)


def angle_difference(a: float, b: float) -> float:
    """Shortest signed difference a - b in degrees, wrapped to (-180, 180]."""
    return wrap_degrees(a - b)
