"""Batch experiment CLI.

One executable with five subcommands covering the full loop:

- ``simulate``: experiment config -> sensor log + truth + resolved config
- ``fuse``: sensor log + config -> fused trajectory + step diagnostics per filter
- ``groundtruth``: LiDAR point CSV -> reference trajectory + fit diagnostics
- ``evaluate``: fused + reference CSVs -> RMSE report
- ``sweep``: experiment config -> forgetting-factor RMSE grid

Exit codes: 0 success, 1 numerical failure during estimation, 2 bad
config, unreadable input, or malformed rows.  Outputs are deterministic
for a fixed seed once the timestamped header line is suppressed with
``--no-header-timestamp``.
"""

import argparse
import datetime
import json
import math
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ConfigError, LogParseError, MarkerLocError
from .evaluation import position_error, rmse, run_rmse, sweep_alpha
from .fusion_filters import (
    DEFAULT_GATE_THRESHOLD,
    STEP_COLUMNS,
    FilterConfig,
    FilterMode,
    replay_log,
)
from .ground_truth_pipeline import (
    SphereSpec,
    extract_sphere_centers,
    fit_reference,
    partition_rings,
    read_lidar_csv,
)
from .pose_geometry import CameraOffset
from .sensor_log import read_log_csv, write_log_csv
from .sensor_simulator import (
    BUILTIN_MAPS,
    CameraSpec,
    MapSpec,
    NoiseSpec,
    SensorRates,
    generate_truth,
    synthesize_log,
    write_truth_csv,
)
from .trajectory import GroundTruthTrajectory

CONFIG_SCHEMA_VERSION = 1


def bundled_config_path(name: str) -> Path:
    """Path of a config shipped with the package (no .json suffix needed)."""
    stem = name[:-5] if name.endswith(".json") else name
    candidate = resources.files("markerloc") / "configs" / f"{stem}.json"
    with resources.as_file(candidate) as path:
        if not path.exists():
            raise ConfigError(f"no bundled config named {name!r}")
        return Path(path)


@dataclass
class ExperimentConfig:
    """Fully resolved scenario: map, motion, sensors, filter bank."""

    name: str
    seed: int
    map_spec: MapSpec
    noise: NoiseSpec
    rates: SensorRates
    camera: CameraSpec
    speed: float = 1.0
    laps: float = 1.0
    filters: list[FilterConfig] = field(default_factory=list)

    def resolved_dict(self) -> dict:
        return {
            "schema": CONFIG_SCHEMA_VERSION,
            "name": self.name,
            "seed": self.seed,
            "speed": self.speed,
            "laps": self.laps,
            "map": self.map_spec.to_dict(),
            "noise": {
                "sigma_x": self.noise.sigma_x,
                "sigma_y": self.noise.sigma_y,
                "sigma_heading": self.noise.sigma_heading,
                "sigma_yaw_rate": self.noise.sigma_yaw_rate,
                "gyro_drift_rate": self.noise.gyro_drift_rate,
                "sigma_speed": self.noise.sigma_speed,
                "outlier_prob": self.noise.outlier_prob,
                "outlier_offset": self.noise.outlier_offset,
            },
            "rates": {
                "imu_hz": self.rates.imu_hz,
                "encoder_hz": self.rates.encoder_hz,
                "camera_hz": self.rates.camera_hz,
            },
            "camera": {
                "fov_deg": self.camera.fov_deg,
                "max_range": self.camera.max_range,
                "lateral": self.camera.offset.lateral,
                "longitudinal": self.camera.offset.longitudinal,
            },
            "filters": [
                {
                    "mode": f.mode.value,
                    "alpha_q": f.alpha_q,
                    "alpha_r": f.alpha_r,
                    "gate_threshold": (
                        "inf" if math.isinf(f.gate_threshold) else f.gate_threshold
                    ),
                    "process_noise_diag": list(np.diag(f.process_noise)),
                    "measurement_noise_diag": list(np.diag(f.measurement_noise)),
                    "initial_covariance_diag": list(np.diag(f.initial_covariance)),
                }
                for f in self.filters
            ],
        }


def _build_dataclass(cls, data: dict, where: str):
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _filter_from_dict(data: dict, matrices: dict, where: str) -> FilterConfig:
    known = {"mode", "alpha_q", "alpha_r", "gate_threshold"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    if "mode" not in data:
        raise ConfigError(f"{where}: missing 'mode'")
    try:
        mode = FilterMode(data["mode"])
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    kwargs = dict(matrices)
    kwargs["alpha_q"] = float(data.get("alpha_q", 1.0))
    kwargs["alpha_r"] = float(data.get("alpha_r", 1.0))
    threshold = data.get("gate_threshold", DEFAULT_GATE_THRESHOLD if mode.gated else "inf")
    kwargs["gate_threshold"] = math.inf if threshold in ("inf", None) else float(threshold)
    try:
        return FilterConfig(mode=mode, **kwargs)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def load_config(path, seed_override: int | None = None) -> ExperimentConfig:
    """Load and validate an experiment config JSON.

    ``path`` may be a filesystem path or the name of a bundled config.  A
    config's ``map`` entry is an inline map object, a path relative to the
    config file, or a builtin map name.
    """
    given = Path(path)
    if not given.exists():
        try:
            given = bundled_config_path(str(path))
        except ConfigError:
            raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(given.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{given}: invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{given}: config must be a JSON object")
    schema = data.get("schema")
    if schema != CONFIG_SCHEMA_VERSION:
        raise ConfigError(
            f"{given}: schema is {schema!r}, this build reads version {CONFIG_SCHEMA_VERSION}"
        )

    map_entry = data.get("map")
    if isinstance(map_entry, dict):
        map_spec = MapSpec.from_dict(map_entry)
    elif isinstance(map_entry, str):
        if map_entry in BUILTIN_MAPS:
            map_spec = BUILTIN_MAPS[map_entry]()
        else:
            map_path = (given.parent / map_entry).resolve()
            if not map_path.exists():
                raise ConfigError(f"map file not found: {map_entry}")
            try:
                map_spec = MapSpec.from_dict(json.loads(map_path.read_text()))
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{map_path}: invalid JSON: {exc}") from exc
    else:
        raise ConfigError("config field 'map' must be an object, path, or builtin name")

    noise = _build_dataclass(NoiseSpec, data.get("noise", {}), "config field 'noise'")
    rates = _build_dataclass(SensorRates, data.get("rates", {}), "config field 'rates'")
    camera_data = dict(data.get("camera", {}))
    offset = CameraOffset(
        float(camera_data.pop("lateral", 0.0)),
        float(camera_data.pop("longitudinal", 0.0)),
    )
    camera_data["offset"] = offset
    camera = _build_dataclass(CameraSpec, camera_data, "config field 'camera'")

    matrices = {}
    matrix_entry = data.get("noise_matrices", {})
    if not isinstance(matrix_entry, dict):
        raise ConfigError("config field 'noise_matrices' must be an object")
    diag_keys = {
        "process": ("process_noise", 4),
        "measurement": ("measurement_noise", 3),
        "initial": ("initial_covariance", 4),
    }
    for key, (kwarg, size) in diag_keys.items():
        if key in matrix_entry:
            diag = matrix_entry[key]
            if len(diag) != size:
                raise ConfigError(f"noise_matrices.{key} needs {size} diagonal entries")
            matrices[kwarg] = np.diag([float(v) for v in diag])

    filter_entries = data.get("filters", [])
    filters = [
        _filter_from_dict(entry, matrices, f"config filters[{i}]")
        for i, entry in enumerate(filter_entries)
    ]

    seed = data.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError("config field 'seed' must be an integer")
    if seed_override is not None:
        seed = seed_override
    speed = float(data.get("speed", 1.0))
    laps = float(data.get("laps", 1.0))
    return ExperimentConfig(
        name=str(data.get("name", given.stem)),
        seed=seed,
        map_spec=map_spec,
        noise=noise,
        rates=rates,
        camera=camera,
        speed=speed,
        laps=laps,
        filters=filters,
    )


def _header_line(args) -> str | None:
    if args.no_header_timestamp:
        return None
    stamp = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    return f"# generated {stamp}"


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_rows_csv(path, header: str, rows, header_line: str | None) -> None:
    with open(path, "w", newline="") as handle:
        if header_line is not None:
            handle.write(header_line + "\n")
        handle.write(header + "\n")
        for row in rows:
            handle.write(",".join(row) + "\n")


def _read_txy_csv(path) -> np.ndarray:
    """Read rows whose first three fields are t,x,y; skip comments/header."""
    rows = []
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"input file not found: {path}")
    with open(path, newline="") as handle:
        for row_number, line in enumerate(handle, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split(",")
            if fields[0] in ("t", "t_or_param"):
                continue
            try:
                rows.append([float(fields[0]), float(fields[1]), float(fields[2])])
            except (IndexError, ValueError) as exc:
                raise LogParseError(row_number, str(exc)) from exc
    if not rows:
        raise ConfigError(f"{path} holds no data rows")
    return np.array(rows)


def _simulate(config: ExperimentConfig):
    truth = generate_truth(
        config.map_spec, speed=config.speed, dt=1.0 / config.rates.imu_hz, laps=config.laps
    )
    log = synthesize_log(
        truth,
        config.map_spec,
        config.noise,
        config.rates,
        camera=config.camera,
        seed=config.seed,
    )
    return truth, log


def cmd_simulate(args) -> int:
    config = load_config(args.config, args.seed)
    out = _out_dir(args)
    header = _header_line(args)
    truth, log = _simulate(config)
    write_log_csv(log, out / "log.csv", header)
    write_truth_csv(truth, out / "truth.csv", header)
    (out / "config_resolved.json").write_text(
        json.dumps(config.resolved_dict(), indent=2, sort_keys=True) + "\n"
    )
    print(f"simulate {config.name}: {len(log)} records, {len(truth)} truth states -> {out}")
    return 0


def cmd_fuse(args) -> int:
    config = load_config(args.config, args.seed)
    log = read_log_csv(args.log)
    if not config.filters:
        raise ConfigError("config lists no filters to run")
    out = _out_dir(args)
    header = _header_line(args)
    markers = config.map_spec.markers_by_id()
    for filter_config in config.filters:
        run = replay_log(log, markers, config.camera.offset, filter_config)
        slug = filter_config.mode.slug
        _write_rows_csv(
            out / f"fused_{slug}.csv",
            "t,x,y,heading,speed",
            ([str(v) for v in row] for row in run.trajectory),
            header,
        )
        _write_rows_csv(
            out / f"steps_{slug}.csv",
            ",".join(STEP_COLUMNS),
            (step.as_csv_fields() for step in run.steps),
            header,
        )
        print(
            f"fuse {filter_config.mode.value}: {run.predict_count} predicts, "
            f"{run.correct_count} corrections ({run.rejected_count} rejected), "
            f"mean_step_ms={run.mean_step_seconds * 1e3:.4f} "
            f"max_step_ms={run.max_step_seconds * 1e3:.4f}"
        )
    return 0


def cmd_groundtruth(args) -> int:
    points = read_lidar_csv(args.points)
    rings = [int(r) for r in args.rings.split(",")] if args.rings else list(range(16))
    points = partition_rings(points, rings)
    sphere = SphereSpec(args.radius, args.mount_height)
    if args.height_band is not None:
        low = sphere.mount_height - sphere.radius - args.height_band
        high = sphere.mount_height + sphere.radius + args.height_band
        points = [p for p in points if low <= p.z <= high]
    extraction = extract_sphere_centers(points, sphere, window=args.window)
    trajectory, diagnostics = fit_reference(extraction, floor_correction=args.floor_correction)
    out = _out_dir(args)
    header = _header_line(args)
    rows = (
        [str(t), str(x), str(y)]
        for t, (x, y) in zip(trajectory.times, trajectory.points)
    )
    _write_rows_csv(out / "reference.csv", "t,x,y", rows, header)
    (out / "reference_diagnostics.json").write_text(
        json.dumps(
            {
                "sample_count": diagnostics.sample_count,
                "window_count": extraction.window_count,
                "skipped_windows": [[i, reason] for i, reason in diagnostics.skipped_windows],
                "z_mean": diagnostics.z_mean,
                "z_spread": diagnostics.z_spread,
                "max_interpolation_residual": diagnostics.max_interpolation_residual,
                "length": trajectory.length,
            },
            indent=2,
            sort_keys=True,
        )
        + "\n"
    )
    print(
        f"groundtruth: {diagnostics.sample_count} centers from {extraction.window_count} windows "
        f"({len(diagnostics.skipped_windows)} skipped) -> {out}"
    )
    return 0


def cmd_evaluate(args) -> int:
    fused = _read_txy_csv(args.fused)
    truth_rows = _read_txy_csv(args.truth)
    reference = GroundTruthTrajectory.from_samples(truth_rows[:, 1:3], times=truth_rows[:, 0])
    errors = position_error(fused, reference, time_offset=args.time_offset)
    series = rmse(errors)
    out = _out_dir(args)
    header = _header_line(args)
    name = Path(args.fused).stem
    _write_rows_csv(
        out / f"rmse_{name}.csv",
        "t,error,cumulative_rmse",
        (
            [str(t), str(e), str(c)]
            for t, e, c in zip(fused[:, 0], errors, series.cumulative)
        ),
        header,
    )
    _write_rows_csv(
        out / f"rmse_{name}_long.csv",
        "series,t,value",
        ([name, str(t), str(c)] for t, c in zip(fused[:, 0], series.cumulative)),
        header,
    )
    print(f"evaluate {name}: final_rmse={series.final:.6f} over {len(errors)} samples")
    return 0


def cmd_sweep(args) -> int:
    config = load_config(args.config, args.seed)
    out = _out_dir(args)
    header = _header_line(args)
    truth, log = _simulate(config)
    reference = truth.reference()
    base = next(
        (f for f in config.filters if f.mode is FilterMode.AEKF),
        config.filters[0] if config.filters else None,
    )
    result = sweep_alpha(
        log,
        config.map_spec.markers_by_id(),
        config.camera.offset,
        reference,
        base,
        workers=args.workers,
    )
    _write_rows_csv(
        out / "sweep.csv",
        "alpha_q,alpha_r,rmse",
        ([str(aq), str(ar), str(v)] for aq, ar, v in result.rows()),
        header,
    )
    print(
        f"sweep {config.name}: best alpha_q={result.best_alpha_q} "
        f"alpha_r={result.best_alpha_r} rmse={result.best_rmse:.6f}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="markerloc",
        description="Marker-aided localization experiments: simulate, fuse, evaluate.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=False):
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument(
            "--no-header-timestamp",
            action="store_true",
            help="omit the timestamped header line for byte-stable outputs",
        )
        if config:
            p.add_argument(
                "--config", required=True, help="experiment config JSON (path or bundled name)"
            )

    p = sub.add_parser("simulate", help="generate truth and a sensor log")
    common(p, config=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fuse", help="run the configured filters over a sensor log")
    common(p, config=True)
    p.add_argument("--log", required=True, help="sensor log CSV from simulate")
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("groundtruth", help="extract a reference trajectory from LiDAR returns")
    common(p)
    p.add_argument("--points", required=True, help="LiDAR CSV with rows t,x,y,z,ring")
    p.add_argument("--radius", type=float, required=True, help="target sphere radius (m)")
    p.add_argument("--mount-height", type=float, default=0.0, help="sphere center height (m)")
    p.add_argument("--rings", default=None, help="comma-separated ring indices to keep")
    p.add_argument("--window", type=float, default=0.1, help="grouping window (s)")
    p.add_argument(
        "--height-band",
        type=float,
        default=None,
        help="keep returns within mount height +- (radius + band) meters",
    )
    p.add_argument("--floor-correction", action="store_true")
    p.set_defaults(func=cmd_groundtruth)

    p = sub.add_parser("evaluate", help="score a fused trajectory against a reference")
    common(p)
    p.add_argument("--fused", required=True, help="fused trajectory CSV")
    p.add_argument("--truth", required=True, help="reference trajectory CSV")
    p.add_argument(
        "--time-offset",
        type=float,
        default=None,
        help="use timestamp association with this clock offset instead of nearest point",
    )
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="grid-sweep the adaptive filter's forgetting factors")
    common(p, config=True)
    p.add_argument(
        "--workers",
        type=int,
        default=None,
        help="run sweep cells in a process pool of this size (cells are independent)",
    )
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MarkerLocError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
