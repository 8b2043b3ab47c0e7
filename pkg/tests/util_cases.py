"""Random-case generators shared between module tests and the acceptance suite."""

import numpy as np

from markerloc import CameraOffset, MarkerSpec
from markerloc.vehicle_dynamics import VehicleState


def random_round_trip_cases(count: int, seed: int = 42):
    """Non-degenerate (state, marker, offset) triples for the pose round trip.

    The marker faces the vehicle (relative heading within +-85 degrees so the
    yaw stays inside the recoverable branch) and the camera offset is purely
    longitudinal, which the inverse construction reproduces exactly.
    """
    rng = np.random.default_rng(seed)
    cases = []
    while len(cases) < count:
        x, y = rng.uniform(-10.0, 10.0, size=2)
        mx, my = rng.uniform(-10.0, 10.0, size=2)
        if np.hypot(mx - x, my - y) < 0.05:
            continue
        heading = rng.uniform(-180.0, 180.0)
        delta = rng.uniform(-85.0, 85.0)
        marker = MarkerSpec(len(cases), mx, my, heading - delta)
        offset = CameraOffset(0.0, rng.uniform(0.0, 1.0))
        cases.append((VehicleState(x, y, heading, 0.0), marker, offset))
    return cases


def random_vehicle_states(count: int, seed: int = 7):
    rng = np.random.default_rng(seed)
    states = []
    for _ in range(count):
        states.append(
            VehicleState(
                rng.uniform(-10.0, 10.0),
                rng.uniform(-10.0, 10.0),
                rng.uniform(-180.0, 180.0),
                rng.uniform(-2.0, 2.0),
            )
        )
    return states
