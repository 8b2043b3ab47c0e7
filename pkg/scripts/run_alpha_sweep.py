"""Grid-sweep the adaptive filter's forgetting factors on one scenario.

Prints the 10x10 RMSE grid, writes sweep.csv, and with --plot renders a
heatmap with the best cell marked.

    python3 scripts/run_alpha_sweep.py --config oval --workers 4 --plot
"""

import argparse
import math
from pathlib import Path

from markerloc import FilterMode, generate_truth, sweep_alpha, synthesize_log
from markerloc.cli import load_config


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--config", default="oval", help="config path or bundled name")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--out", default="results/sweep", help="output directory")
    parser.add_argument("--workers", type=int, default=None, help="sweep cell process pool size")
    parser.add_argument("--plot", action="store_true", help="also write sweep.png")
    args = parser.parse_args(argv)

    config = load_config(args.config, args.seed)
    truth = generate_truth(
        config.map_spec, speed=config.speed, dt=1.0 / config.rates.imu_hz, laps=config.laps
    )
    log = synthesize_log(
        truth, config.map_spec, config.noise, config.rates, camera=config.camera, seed=config.seed
    )
    base = next((f for f in config.filters if f.mode is FilterMode.AEKF), None)
    result = sweep_alpha(
        log,
        config.map_spec.markers_by_id(),
        config.camera.offset,
        truth.reference(),
        base,
        workers=args.workers,
    )

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "sweep.csv", "w") as handle:
        handle.write("alpha_q,alpha_r,rmse\n")
        for aq, ar, value in result.rows():
            handle.write(f"{aq},{ar},{value}\n")

    print(f"scenario {config.name} (seed {config.seed}): rmse (m), alpha_q down, alpha_r across")
    print("      " + " ".join(f"{ar:>8.1f}" for ar in result.alpha_r_values))
    for i, aq in enumerate(result.alpha_q_values):
        cells = " ".join(
            f"{v:>8.4f}" if math.isfinite(v) else f"{'inf':>8}" for v in result.rmse_grid[i]
        )
        print(f"{aq:>5.1f} {cells}")
    print(
        f"best: alpha_q={result.best_alpha_q} alpha_r={result.best_alpha_r} "
        f"rmse={result.best_rmse:.6f} -> {out / 'sweep.csv'}"
    )

    if args.plot:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(5.5, 4.5))
        image = ax.imshow(result.rmse_grid, origin="lower", cmap="viridis")
        ax.set_xticks(range(10), [f"{v:.1f}" for v in result.alpha_r_values])
        ax.set_yticks(range(10), [f"{v:.1f}" for v in result.alpha_q_values])
        ax.set_xlabel("alpha_r")
        ax.set_ylabel("alpha_q")
        best_i = result.alpha_q_values.index(result.best_alpha_q)
        best_j = result.alpha_r_values.index(result.best_alpha_r)
        ax.scatter([best_j], [best_i], marker="*", s=160, c="white", edgecolors="black")
        fig.colorbar(image, ax=ax, label="final rmse (m)")
        fig.tight_layout()
        fig.savefig(out / "sweep.png", dpi=150)
        print(f"plot -> {out / 'sweep.png'}")


if __name__ == "__main__":
    main()
