import math

import numpy as np
import pytest
from util_lidar import DEG, cone_center, drive_by, scan_sphere

from markerloc import (
    AmbiguousTargetError,
    InsufficientDataError,
    LidarPoint,
    LogParseError,
    SphereSpec,
    extract_sphere_centers,
    fit_reference,
    partition_rings,
    read_lidar_csv,
)


class TestPartitionRings:
    def make_cloud(self):
        return [
            LidarPoint(0.0, 1.0, 0.0, math.tan(-9.0 * DEG), 3),
            LidarPoint(0.0, 0.0, 1.0, math.tan(-1.0 * DEG), 7),
            LidarPoint(0.1, 1.0, 1.0, math.sqrt(2.0) * math.tan(-1.0 * DEG), 7),
        ]

    def test_keep_all_is_identity(self):
        cloud = self.make_cloud()
        assert partition_rings(cloud, range(16)) == cloud

    def test_keep_none_is_empty(self):
        assert partition_rings(self.make_cloud(), []) == []

    def test_keep_single_ring(self):
        kept = partition_rings(self.make_cloud(), [7])
        assert len(kept) == 2
        assert all(p.ring == 7 for p in kept)

    def test_invalid_ring_index_rejected(self):
        with pytest.raises(ValueError):
            partition_rings(self.make_cloud(), [16])


class TestExtractSphereCenters:
    def test_single_return_on_axis(self):
        points = [LidarPoint(0.0, 1.0, 0.0, 0.0, 7)]
        extraction = extract_sphere_centers(points, SphereSpec(0.05))
        assert np.allclose(extraction.centers[0], [0.0, 1.05, 0.0, 0.0], atol=1e-12)

    def test_radius_correction_is_norm_additive(self):
        center = cone_center(2.8, 0.3)
        points = scan_sphere(center, 0.1, t=0.01)
        extraction = extract_sphere_centers(points, SphereSpec(0.1))
        centroid = np.mean([[p.x, p.y, p.z] for p in points], axis=0)
        estimated = extraction.centers[0, 1:4]
        assert np.linalg.norm(estimated) == np.linalg.norm(centroid) + 0.1

    def test_synthetic_scan_recovers_center_within_two_millimeters(self):
        center = cone_center(2.8, 0.3)
        points = scan_sphere(center, 0.1, t=0.01)
        extraction = extract_sphere_centers(points, SphereSpec(0.1))
        assert np.linalg.norm(extraction.centers[0, 1:4] - center) < 2e-3

    def test_empty_input_yields_no_samples(self):
        extraction = extract_sphere_centers([], SphereSpec(0.1))
        assert extraction.window_count == 0
        assert len(extraction.centers) == 0

    def test_two_clusters_in_one_window_skipped_and_reported(self):
        near = [LidarPoint(0.01, 1.0, 0.0, 0.0, 7), LidarPoint(0.02, 1.01, 0.0, 0.0, 7)]
        far = [LidarPoint(0.03, 3.0, 0.0, 0.0, 7)]
        extraction = extract_sphere_centers(near + far, SphereSpec(0.05))
        assert len(extraction.centers) == 0
        assert len(extraction.skipped_windows) == 1

    def test_strict_mode_raises_on_ambiguity(self):
        near = [LidarPoint(0.01, 1.0, 0.0, 0.0, 7)]
        far = [LidarPoint(0.03, 3.0, 0.0, 0.0, 7)]
        with pytest.raises(AmbiguousTargetError):
            extract_sphere_centers(near + far, SphereSpec(0.05), strict=True)

    def test_gap_under_threshold_is_one_cluster(self):
        points = [
            LidarPoint(0.01, 1.0, 0.0, 0.0, 7),
            LidarPoint(0.02, 1.14, 0.0, 0.0, 7),
            LidarPoint(0.03, 1.28, 0.0, 0.0, 7),
        ]
        extraction = extract_sphere_centers(points, SphereSpec(0.05))
        assert len(extraction.centers) == 1

    def test_timestamp_is_mean_of_window_points(self):
        points = [LidarPoint(0.02, 1.0, 0.0, 0.0, 7), LidarPoint(0.06, 1.01, 0.0, 0.0, 7)]
        extraction = extract_sphere_centers(points, SphereSpec(0.05))
        assert extraction.centers[0, 0] == pytest.approx(0.04, abs=1e-12)


class TestFitReference:
    def test_drive_by_trajectory_error_under_two_millimeters(self):
        points, _ = drive_by()
        extraction = extract_sphere_centers(points, SphereSpec(0.1))
        trajectory, diagnostics = fit_reference(extraction)
        assert diagnostics.sample_count == 60
        worst = 0.0
        for t, center in [(row[0], row[1:3]) for row in extraction.centers]:
            expected = cone_center(2.8, 0.3 + 0.0714 * t)[:2]
            worst = max(worst, float(np.linalg.norm(center - expected)))
        assert worst < 2e-3
        # interpolated positions stay on the arc between samples
        mids = (extraction.centers[:-1, 0] + extraction.centers[1:, 0]) / 2.0
        for t in mids:
            expected = cone_center(2.8, 0.3 + 0.0714 * t)[:2]
            assert np.linalg.norm(trajectory.query_time(t) - expected) < 2e-3

    def test_diagnostics_report_flat_height(self):
        points, _ = drive_by(window_count=10)
        extraction = extract_sphere_centers(points, SphereSpec(0.1))
        _, diagnostics = fit_reference(extraction)
        assert diagnostics.z_spread < 1e-9
        assert diagnostics.z_mean == pytest.approx(
            2.8 * math.tan(-1.0 * DEG), abs=1e-3
        )

    def test_too_few_centers_rejected(self):
        points, _ = drive_by(window_count=3)
        extraction = extract_sphere_centers(points, SphereSpec(0.1))
        with pytest.raises(InsufficientDataError):
            fit_reference(extraction)


class TestReadLidarCsv:
    def test_round_trip_rows(self, tmp_path):
        path = tmp_path / "cloud.csv"
        path.write_text("t,x,y,z,ring\n0.0,1.0,0.5,-0.1,7\n0.1,1.1,0.4,-0.1,7\n")
        points = read_lidar_csv(path)
        assert len(points) == 2
        assert points[0].ring == 7
        assert points[1].x == 1.1

    def test_malformed_row_reports_number(self, tmp_path):
        path = tmp_path / "cloud.csv"
        path.write_text("0.0,1.0,0.5,-0.1,7\n0.1,oops,0.4,-0.1,7\n")
        with pytest.raises(LogParseError) as info:
            read_lidar_csv(path)
        assert info.value.row == 2
