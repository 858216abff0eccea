#!/usr/bin/env python3
"""Produce the CSV inputs for the four figure analogues.

Runs the baselines and the trained agent on the two-vehicle scenario at
10 dB (time-averaged PCRB and energy-vs-budget figures), the overload
scenario (queue evolution figure), and the SNR sweep (log-PCRB vs SNR
figure). Trains a checkpoint first if none exists.

    python3 scripts/reproduce_figures.py --out-dir out/

Render afterwards with the plotting frontend, e.g.:

    node frontend/dist/plot.js --kind pcrb-convergence \
        --in out/fig3-*.csv --out out/fig3.svg
"""

import argparse
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from misac.harness import ExperimentSpec, emit, run_episode, sweep_snr  # noqa: E402
from misac.scenario import load_config  # noqa: E402

TOY = ROOT / "configs" / "toy-k2.cfg"
OVERLOAD = ROOT / "configs" / "toy-k2-overload.cfg"


def ensure_checkpoint(path: Path, episodes: int, slots: int) -> Path:
    if path.exists():
        return path
    print(f"training ld-hmoe checkpoint ({episodes} episodes) -> {path}")
    cmd = [sys.executable, "-m", "misac.cli", "train", "--config", str(TOY),
           "--variant", "ld-hmoe", "--episodes", str(episodes),
           "--slots", str(slots), "--checkpoint", str(path),
           "--log", str(path.with_suffix(".curve.csv"))]
    subprocess.run(cmd, check=True, cwd=ROOT)
    return path


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out-dir", default="out")
    ap.add_argument("--checkpoint", default="artifacts/ld-hmoe-toy.ckpt")
    ap.add_argument("--slots", type=int, default=20000)
    ap.add_argument("--sweep-slots", type=int, default=4000)
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--episodes", type=int, default=260)
    args = ap.parse_args()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ckpt = ensure_checkpoint(Path(args.checkpoint), args.episodes, 500)
    toy = load_config(TOY)
    overload = load_config(OVERLOAD)
    seeds = tuple(range(args.seeds))

    # Figs 3 and 4: PCRB convergence and energy vs budget at 10 dB
    for policy in ("radar-only", "vision-only", "greedy-dpp", "ld-hmoe"):
        rows = []
        for seed in seeds:
            records, _ = run_episode(
                policy, toy, seed=seed, slots=args.slots,
                checkpoint=str(ckpt) if policy == "ld-hmoe" else None)
            rows.extend(records)
        path = out / f"fig3-{policy}.csv"
        emit(rows, path, "csv")
        print(f"wrote {path}")

    # Fig 5: queue evolution under overload arrivals
    for policy in ("vision-only", "greedy-dpp", "ld-hmoe"):
        records, _ = run_episode(
            policy, overload, seed=0, slots=args.slots,
            checkpoint=str(ckpt) if policy == "ld-hmoe" else None)
        path = out / f"fig5-{policy}.csv"
        emit(records, path, "csv")
        print(f"wrote {path}")

    # Fig 6: steady-state PCRB over the SNR grid
    spec = ExperimentSpec(
        policies=("radar-only", "vision-only", "greedy-dpp", "ld-hmoe"),
        seeds=seeds, slots=args.sweep_slots, sweep="snr",
        grid=(0.0, 5.0, 10.0, 15.0, 20.0), checkpoint=str(ckpt))
    rows = sweep_snr(spec, toy)
    path = out / "fig6-sweep.csv"
    emit(rows, path, "csv")
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
