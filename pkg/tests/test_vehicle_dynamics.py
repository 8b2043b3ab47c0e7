import math
import time

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from util_cases import random_vehicle_states

from markerloc import ControlInput, VehicleState, angle_difference
from markerloc.vehicle_dynamics import jacobian, step

DEG2RAD = math.pi / 180.0


class TestStep:
    def test_straight_line(self):
        out = step(VehicleState(0.0, 0.0, 0.0, 1.0), ControlInput(0.0, 1.0, 0.1))
        assert out.as_vector() == pytest.approx([0.1, 0.0, 0.0, 1.0], abs=1e-15)

    def test_axis_aligned_vertical(self):
        out = step(VehicleState(0.0, 0.0, 90.0, 1.0), ControlInput(0.0, 1.0, 0.1))
        assert out.x == pytest.approx(0.0, abs=1e-15)
        assert out.y == pytest.approx(0.1, abs=1e-15)
        assert out.heading == 90.0

    def test_turning_step(self):
        out = step(VehicleState(1.0, 2.0, 0.0, 2.0), ControlInput(10.0, 2.1, 0.1))
        assert out.as_vector() == pytest.approx([1.2, 2.0, 1.0, 2.1], abs=1e-12)

    def test_position_advances_at_previous_speed(self):
        # the commanded speed takes effect one step later by construction
        out = step(VehicleState(0.0, 0.0, 0.0, 0.0), ControlInput(0.0, 5.0, 0.1))
        assert out.x == 0.0
        assert out.speed == 5.0

    def test_heading_wraps(self):
        out = step(VehicleState(0.0, 0.0, 179.0, 0.0), ControlInput(20.0, 0.0, 0.1))
        assert out.heading == pytest.approx(-179.0, abs=1e-12)

    @given(
        st.floats(-170.0, 170.0),
        st.floats(-90.0, 90.0),
        st.floats(0.0, 2.0),
        st.floats(0.0, 2.0),
    )
    def test_rotational_equivariance(self, heading, rotate, v, cmd):
        # rotating the start pose rotates the displacement, nothing else
        u = ControlInput(15.0, cmd, 0.05)
        a = step(VehicleState(0.0, 0.0, heading, v), u)
        b = step(VehicleState(0.0, 0.0, heading + rotate, v), u)
        r = rotate * DEG2RAD
        rotated = (
            a.x * math.cos(r) - a.y * math.sin(r),
            a.x * math.sin(r) + a.y * math.cos(r),
        )
        assert b.x == pytest.approx(rotated[0], abs=1e-9)
        assert b.y == pytest.approx(rotated[1], abs=1e-9)
        assert abs(angle_difference(b.heading, a.heading + rotate)) < 1e-9

    def test_rejects_nonpositive_dt(self):
        with pytest.raises(ValueError):
            ControlInput(0.0, 1.0, 0.0)


class TestJacobian:
    def test_zero_speed_zero_heading(self):
        f = jacobian(VehicleState(0.0, 0.0, 0.0, 0.0), ControlInput(0.0, 0.0, 0.1))
        assert f[0][3] == pytest.approx(0.1, abs=1e-15)
        assert f[0][2] == 0.0
        assert f[1][2] == 0.0

    def test_heading_column_uses_radian_slope(self):
        # d(x)/d(heading) carries the degree-to-radian factor of the stored state
        f = jacobian(VehicleState(0.0, 0.0, 90.0, 1.0), ControlInput(0.0, 1.0, 0.1))
        assert f[0][2] == pytest.approx(-0.1 * DEG2RAD, abs=1e-15)
        assert f[1][3] == pytest.approx(0.1, abs=1e-15)

    def test_lower_rows_are_identity(self):
        f = jacobian(VehicleState(1.0, -2.0, 33.0, 1.4), ControlInput(5.0, 1.0, 0.05))
        assert np.array_equal(f[2], [0.0, 0.0, 1.0, 0.0])
        assert np.array_equal(f[3], [0.0, 0.0, 0.0, 1.0])

    def test_matches_central_differences_over_1000_states(self):
        # the encoder reads the state's own speed, so the differenced map
        # feeds each perturbed speed back through the control
        h = 1e-6
        worst = 0.0
        began = time.perf_counter()
        for state in random_vehicle_states(1000):
            analytic = jacobian(state, ControlInput(12.0, state.speed, 0.1))
            base = state.as_vector()
            fd = np.zeros((4, 4))
            for j in range(4):
                plus = base.copy()
                minus = base.copy()
                plus[j] += h
                minus[j] -= h
                sp = step(VehicleState(*plus), ControlInput(12.0, plus[3], 0.1)).as_vector()
                sm = step(VehicleState(*minus), ControlInput(12.0, minus[3], 0.1)).as_vector()
                diff = sp - sm
                # the heading component may wrap between evaluations
                diff[2] = angle_difference(sp[2], sm[2])
                fd[:, j] = diff / (2.0 * h)
            rel = np.abs(analytic - fd) / np.maximum(1.0, np.abs(analytic))
            worst = max(worst, rel.max())
        elapsed = time.perf_counter() - began
        assert worst < 1e-5
        assert elapsed < 1.0
