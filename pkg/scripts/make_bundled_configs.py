"""Regenerate the bundled experiment configs from the builtin maps.

Writes src/markerloc/configs/{oval,crossroads}.json with the map inlined
so the shipped configs have no file dependencies.  Run from the repo root
after changing either builtin map or the default scenario parameters.
"""

import json
from pathlib import Path

from markerloc import crossroads_map, oval_map

CONFIG_DIR = Path(__file__).resolve().parents[1] / "src" / "markerloc" / "configs"

SHARED = {
    "schema": 1,
    "speed": 1.0,
    "laps": 1.0,
    "rates": {"imu_hz": 100.0, "encoder_hz": 100.0, "camera_hz": 30.0},
    "camera": {"fov_deg": 60.0, "max_range": 3.0, "lateral": 0.0, "longitudinal": 0.36},
}

SCENARIOS = {
    "oval": {
        "map": oval_map,
        "seed": 0,
        "noise": {
            "sigma_x": 0.02,
            "sigma_y": 0.02,
            "sigma_heading": 0.1,
            "sigma_yaw_rate": 0.3,
            "gyro_drift_rate": 0.02,
            "sigma_speed": 0.02,
            "outlier_prob": 0.1,
            "outlier_offset": 0.5,
        },
        "filters": [
            {"mode": "ekf"},
            {"mode": "aekf", "alpha_q": 0.6, "alpha_r": 1.0},
            {"mode": "chi2", "gate_threshold": 0.05},
            {"mode": "aekf+chi2", "alpha_q": 0.6, "alpha_r": 1.0, "gate_threshold": 0.05},
        ],
    },
    "crossroads": {
        "map": crossroads_map,
        "seed": 0,
        "noise": {
            "sigma_x": 0.02,
            "sigma_y": 0.02,
            "sigma_heading": 0.1,
            "sigma_yaw_rate": 0.3,
            "gyro_drift_rate": 0.05,
            "sigma_speed": 0.02,
            "outlier_prob": 0.05,
            "outlier_offset": 0.5,
        },
        "filters": [
            {"mode": "ekf"},
            {"mode": "aekf", "alpha_q": 0.9, "alpha_r": 1.0},
            {"mode": "chi2", "gate_threshold": 0.05},
            {"mode": "aekf+chi2", "alpha_q": 0.9, "alpha_r": 1.0, "gate_threshold": 0.05},
        ],
    },
}


def main() -> None:
    CONFIG_DIR.mkdir(parents=True, exist_ok=True)
    for name, scenario in SCENARIOS.items():
        config = dict(SHARED)
        config["name"] = name
        config["seed"] = scenario["seed"]
        config["map"] = scenario["map"]().to_dict()
        config["noise"] = scenario["noise"]
        config["filters"] = scenario["filters"]
        path = CONFIG_DIR / f"{name}.json"
        path.write_text(json.dumps(config, indent=2, sort_keys=True) + "\n")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
