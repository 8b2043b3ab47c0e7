"""Replay every configured filter over one simulated scenario.

Prints a per-mode table of final RMSE, rejection count, and step latency,
and writes one cumulative-RMSE CSV per mode.  With --plot the curves also
go to a PNG in the output directory.

    python3 scripts/run_filter_comparison.py --config oval --seed 0 --plot
"""

import argparse
import math
from pathlib import Path

import numpy as np

from markerloc import (
    generate_truth,
    position_error,
    replay_log,
    rmse,
    synthesize_log,
)
from markerloc.cli import load_config


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--config", default="oval", help="config path or bundled name")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--out", default="results/comparison", help="output directory")
    parser.add_argument("--plot", action="store_true", help="also write comparison.png")
    args = parser.parse_args(argv)

    config = load_config(args.config, args.seed)
    truth = generate_truth(
        config.map_spec, speed=config.speed, dt=1.0 / config.rates.imu_hz, laps=config.laps
    )
    log = synthesize_log(
        truth, config.map_spec, config.noise, config.rates, camera=config.camera, seed=config.seed
    )
    reference = truth.reference()
    markers = config.map_spec.markers_by_id()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    print(f"scenario {config.name} (seed {config.seed}): {len(log)} records")
    print(f"{'mode':<10} {'final rmse m':>12} {'rejected':>9} {'mean step ms':>13}")
    curves = {}
    for filter_config in config.filters:
        run = replay_log(log, markers, config.camera.offset, filter_config)
        mode = filter_config.mode.value
        if not np.all(np.isfinite(run.trajectory)):
            print(f"{mode:<10} {'diverged':>12} {run.rejected_count:>9}")
            continue
        series = rmse(position_error(run.trajectory, reference))
        curves[mode] = (run.trajectory[:, 0], series.cumulative)
        np.savetxt(
            out / f"rmse_{filter_config.mode.slug}.csv",
            np.column_stack([run.trajectory[:, 0], series.cumulative]),
            delimiter=",",
            header="t,cumulative_rmse",
            comments="",
        )
        print(
            f"{mode:<10} {series.final:>12.6f} {run.rejected_count:>9} "
            f"{run.mean_step_seconds * 1e3:>13.4f}"
        )
    print(f"curves -> {out}")

    if args.plot:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(7.0, 4.0))
        for mode, (t, curve) in curves.items():
            ax.plot(t, curve, label=mode)
        ax.set_xlabel("time (s)")
        ax.set_ylabel("cumulative rmse (m)")
        ax.grid(alpha=0.3)
        ax.legend()
        fig.tight_layout()
        fig.savefig(out / "comparison.png", dpi=150)
        print(f"plot -> {out / 'comparison.png'}")


if __name__ == "__main__":
    main()
