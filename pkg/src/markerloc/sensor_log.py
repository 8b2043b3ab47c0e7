"""Sensor log records and their CSV serialization.

A log is a time-ordered sequence of three record kinds:

- ``imu``: gyro yaw rate in deg/s,
- ``enc``: left and right rear-wheel speeds in m/s,
- ``marker``: one fiducial detection: marker id, row-major 3x3 rotation,
  camera-frame translation.

Rows are ragged CSV: ``t,kind,...`` with the payload depending on the kind.
Values are serialized with Python's shortest float repr, so identical logs
serialize to identical bytes and round-trip exactly.
"""

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import LogParseError


@dataclass
class ImuRecord:
    t: float
    yaw_rate: float  # deg/s


@dataclass
class EncoderRecord:
    t: float
    left: float  # m/s
    right: float  # m/s


@dataclass
class MarkerRecord:
    t: float
    marker_id: int
    rotation: np.ndarray  # (3, 3)
    translation: np.ndarray  # (3,)


Record = ImuRecord | EncoderRecord | MarkerRecord


@dataclass
class SensorLog:
    records: list

    def validate(self) -> "SensorLog":
        """Check non-decreasing timestamps; returns self."""
        previous = None
        for i, record in enumerate(self.records):
            if previous is not None and record.t < previous:
                raise ValueError(f"record {i} breaks timestamp ordering")
            previous = record.t
        return self

    def __len__(self) -> int:
        return len(self.records)

    def marker_records(self) -> list:
        return [r for r in self.records if isinstance(r, MarkerRecord)]


def record_to_fields(record: Record) -> list[str]:
    if isinstance(record, ImuRecord):
        return [str(record.t), "imu", str(record.yaw_rate)]
    if isinstance(record, EncoderRecord):
        return [str(record.t), "enc", str(record.left), str(record.right)]
    if isinstance(record, MarkerRecord):
        fields = [str(record.t), "marker", str(record.marker_id)]
        fields += [str(v) for v in record.rotation.reshape(-1)]
        fields += [str(v) for v in record.translation]
        return fields
    raise TypeError(f"unknown record type {type(record)!r}")


def write_log_csv(log: SensorLog, path, header_line: str | None = None) -> None:
    """Write a sensor log; the optional header line goes first, verbatim."""
    with open(path, "w", newline="") as handle:
        if header_line is not None:
            handle.write(header_line + "\n")
        writer = csv.writer(handle)
        for record in log.records:
            writer.writerow(record_to_fields(record))


def read_log_csv(path) -> SensorLog:
    """Parse a sensor log CSV; malformed rows raise LogParseError with the
    1-based row number.  Leading ``#`` comment lines are skipped."""
    records = []
    path = Path(path)
    with open(path, newline="") as handle:
        for row_number, row in enumerate(csv.reader(handle), start=1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                t = float(row[0])
                kind = row[1]
                if kind == "imu":
                    records.append(ImuRecord(t, float(row[2])))
                elif kind == "enc":
                    records.append(EncoderRecord(t, float(row[2]), float(row[3])))
                elif kind == "marker":
                    values = [float(v) for v in row[3:15]]
                    if len(values) != 12:
                        raise ValueError("marker row needs 12 numeric fields")
                    rotation = np.array(values[:9]).reshape(3, 3)
                    translation = np.array(values[9:])
                    records.append(MarkerRecord(t, int(row[2]), rotation, translation))
                else:
                    raise ValueError(f"unknown record kind {kind!r}")
            except (IndexError, ValueError) as exc:
                raise LogParseError(row_number, str(exc)) from exc
    return SensorLog(records).validate()
