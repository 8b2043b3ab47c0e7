import numpy as np
import pytest

from markerloc import (
    EncoderRecord,
    ImuRecord,
    LogParseError,
    MarkerRecord,
    SensorLog,
    read_log_csv,
    rotation_about_y,
    write_log_csv,
)


def small_log():
    rotation = rotation_about_y(12.5)
    return SensorLog(
        [
            ImuRecord(0.0, 3.25),
            EncoderRecord(0.0, 0.98, 1.02),
            MarkerRecord(0.0, 4, rotation, np.array([0.1, 0.0, 1.7])),
            ImuRecord(0.01, -1.5),
        ]
    )


class TestRoundTrip:
    def test_records_survive_write_and_read(self, tmp_path):
        log = small_log()
        path = tmp_path / "log.csv"
        write_log_csv(log, path)
        back = read_log_csv(path)
        assert len(back) == len(log)
        assert isinstance(back.records[0], ImuRecord)
        assert back.records[0].yaw_rate == 3.25
        enc = back.records[1]
        assert (enc.left, enc.right) == (0.98, 1.02)
        marker = back.records[2]
        assert marker.marker_id == 4
        assert np.array_equal(marker.rotation, rotation_about_y(12.5))
        assert np.array_equal(marker.translation, [0.1, 0.0, 1.7])

    def test_float_repr_round_trips_exactly(self, tmp_path):
        # str() emits the shortest repr, which parses back bit-identically
        log = SensorLog([ImuRecord(0.1 + 0.2, 1.0 / 3.0)])
        path = tmp_path / "log.csv"
        write_log_csv(log, path)
        back = read_log_csv(path)
        assert back.records[0].t == 0.1 + 0.2
        assert back.records[0].yaw_rate == 1.0 / 3.0

    def test_header_line_written_verbatim_and_skipped_on_read(self, tmp_path):
        path = tmp_path / "log.csv"
        write_log_csv(small_log(), path, header_line="# generated test")
        assert path.read_text().startswith("# generated test\n")
        assert len(read_log_csv(path)) == 4


class TestValidation:
    def test_timestamps_must_not_decrease(self):
        log = SensorLog([ImuRecord(0.1, 0.0), ImuRecord(0.0, 0.0)])
        with pytest.raises(ValueError):
            log.validate()

    def test_marker_records_filter(self):
        log = small_log()
        markers = log.marker_records()
        assert len(markers) == 1
        assert markers[0].marker_id == 4


class TestParseErrors:
    def test_unknown_kind_reports_row_number(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("0.0,imu,1.0\n0.01,sonar,3\n")
        with pytest.raises(LogParseError) as info:
            read_log_csv(path)
        assert info.value.row == 2
        assert "row 2" in str(info.value)

    def test_short_marker_row_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("0.0,marker,4,1,0,0,0,1,0\n")
        with pytest.raises(LogParseError) as info:
            read_log_csv(path)
        assert info.value.row == 1

    def test_non_numeric_field_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("0.0,enc,fast,1.0\n")
        with pytest.raises(LogParseError):
            read_log_csv(path)

    def test_blank_and_comment_rows_ignored(self, tmp_path):
        path = tmp_path / "log.csv"
        path.write_text("# comment\n\n0.0,imu,2.0\n")
        assert len(read_log_csv(path)) == 1
