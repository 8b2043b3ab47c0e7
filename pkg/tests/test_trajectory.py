import numpy as np
import pytest

from markerloc import GroundTruthTrajectory, InsufficientDataError


def circle_samples(step_deg: float, radius: float = 1.0):
    angles = np.arange(0.0, 360.0, step_deg)
    rad = np.radians(angles)
    return np.column_stack([radius * np.cos(rad), radius * np.sin(rad)])


class TestFromSamples:
    def test_collinear_samples_reproduce_the_line(self):
        xy = np.column_stack([np.arange(4.0), 2.0 * np.arange(4.0)])
        trajectory = GroundTruthTrajectory.from_samples(xy)
        for u in np.linspace(0.0, trajectory.length, 50):
            x, y = trajectory.query(u)
            assert abs(y - 2.0 * x) < 1e-9

    def test_requires_four_distinct_samples(self):
        with pytest.raises(InsufficientDataError):
            GroundTruthTrajectory.from_samples(np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]))

    def test_duplicate_samples_collapse(self):
        xy = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0]])
        trajectory = GroundTruthTrajectory.from_samples(xy)
        assert trajectory.length == pytest.approx(3.0)

    def test_circle_mid_segment_deviation_under_one_millimeter(self):
        trajectory = GroundTruthTrajectory.from_samples(circle_samples(10.0))
        params = trajectory.params
        mids = (params[2:-2] + params[3:-1]) / 2.0  # interior segments only
        for u in mids:
            x, y = trajectory.query(u)
            assert abs(np.hypot(x, y) - 1.0) < 1e-3

    def test_query_at_knots_is_exact(self):
        xy = circle_samples(10.0)
        trajectory = GroundTruthTrajectory.from_samples(xy)
        for i in (0, 5, 17, len(xy) - 1):
            x, y = trajectory.query(trajectory.params[i])
            assert x == pytest.approx(xy[i, 0], abs=1e-12)
            assert y == pytest.approx(xy[i, 1], abs=1e-12)


class TestQueries:
    def test_query_time_interpolates_between_samples(self):
        xy = np.column_stack([np.arange(5.0), np.zeros(5)])
        times = np.arange(5.0) * 0.5
        trajectory = GroundTruthTrajectory.from_samples(xy, times=times)
        x, y = trajectory.query_time(1.25)
        assert x == pytest.approx(2.5, abs=1e-9)
        assert y == pytest.approx(0.0, abs=1e-9)

    def test_nearest_distances_on_shifted_points(self):
        xy = np.column_stack([np.linspace(0.0, 10.0, 21), np.zeros(21)])
        trajectory = GroundTruthTrajectory.from_samples(xy)
        queries = np.column_stack([np.linspace(1.0, 9.0, 9), np.full(9, 0.25)])
        distances = trajectory.nearest_distances(queries)
        assert np.allclose(distances, 0.25, atol=1e-9)

    def test_nearest_distances_projects_between_vertices(self):
        # query directly above a segment midpoint must not snap to a vertex
        xy = np.column_stack([np.arange(0.0, 8.0, 2.0), np.zeros(4)])
        trajectory = GroundTruthTrajectory.from_samples(xy)
        distances = trajectory.nearest_distances(np.array([[3.0, 0.5]]))
        assert distances[0] == pytest.approx(0.5, abs=1e-9)
