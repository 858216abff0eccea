"""Command-line front end.

Subcommands: ``run`` (one episode to CSV/JSON), ``sweep-snr``, ``sweep-v``,
``train`` (write a checkpoint and learning-curve log), ``eval`` (frozen
checkpoint episode). Exit code 0 on success; any failure prints a single
``error: <reason>`` line on stderr and returns a nonzero code.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .agent import make_variant, train
from .harness import (Environment, ExperimentSpec, emit, run_episode,
                      sweep_snr, sweep_v)
from .policy import POLICY_NAMES
from .scenario import default_config, load_config


def _floats(text: str) -> tuple:
    return tuple(float(x) for x in text.split(",") if x.strip() != "")


def _ints(text: str) -> tuple:
    return tuple(int(x) for x in text.split(",") if x.strip() != "")


def _config(args) -> "SimConfig":
    if getattr(args, "config", None):
        return load_config(args.config)
    return default_config()


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="misac",
                                description="multimodal ISAC V2I simulator")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="roll one episode and write records")
    run.add_argument("--config")
    run.add_argument("--policy", required=True, choices=POLICY_NAMES)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--slots", type=int)
    run.add_argument("--out", required=True)
    run.add_argument("--format", choices=("csv", "json"), default="csv")
    run.add_argument("--checkpoint")

    for name, fn in (("sweep-snr", None), ("sweep-v", None)):
        s = sub.add_parser(name, help=f"{name} experiment")
        s.add_argument("--config")
        s.add_argument("--grid", required=True)
        s.add_argument("--policies", default="radar-only,vision-only,greedy-dpp")
        s.add_argument("--seeds", default="0,1,2,3,4,5,6,7,8,9")
        s.add_argument("--slots", type=int)
        s.add_argument("--out", required=True)
        s.add_argument("--format", choices=("csv", "json"), default="csv")
        s.add_argument("--checkpoint")
        s.add_argument("--jobs", type=int, default=1)

    tr = sub.add_parser("train", help="train an agent variant")
    tr.add_argument("--config")
    tr.add_argument("--variant", required=True,
                    choices=("ld-hmoe", "ppo-mono", "moe-homo"))
    tr.add_argument("--episodes", type=int, required=True)
    tr.add_argument("--slots", type=int, default=500)
    tr.add_argument("--seed", type=int, default=0)
    tr.add_argument("--checkpoint", required=True)
    tr.add_argument("--log", help="learning-curve CSV path")

    ev = sub.add_parser("eval", help="evaluate a frozen checkpoint")
    ev.add_argument("--config")
    ev.add_argument("--checkpoint", required=True)
    ev.add_argument("--seed", type=int, default=0)
    ev.add_argument("--slots", type=int)
    ev.add_argument("--out", required=True)
    ev.add_argument("--format", choices=("csv", "json"), default="csv")
    return p


def _cmd_run(args) -> int:
    cfg = _config(args)
    records, diag = run_episode(args.policy, cfg, args.seed,
                                slots=args.slots, checkpoint=args.checkpoint)
    emit(records, args.out, args.format)
    print(f"wrote {len(records)} records to {args.out} "
          f"(activation_rate={diag['activation_rate']:.4f}, "
          f"final_z={diag['final_z']:.4f})")
    return 0


def _cmd_sweep(args, kind: str) -> int:
    cfg = _config(args)
    spec = ExperimentSpec(policies=tuple(args.policies.split(",")),
                          seeds=_ints(args.seeds), slots=args.slots,
                          sweep=kind, grid=_floats(args.grid),
                          checkpoint=args.checkpoint, jobs=args.jobs)
    rows = sweep_snr(spec, cfg) if kind == "snr" else sweep_v(spec, cfg)
    emit(rows, args.out, args.format)
    print(f"wrote {len(rows)} sweep rows to {args.out}")
    return 0


def _cmd_train(args) -> int:
    cfg = _config(args)
    agent = make_variant(args.variant, cfg, seed=args.seed)
    env = Environment(cfg, seed=args.seed)
    rng = np.random.default_rng(np.random.PCG64(args.seed + 424242))
    curves = train(agent, env, episodes=args.episodes, slots=args.slots,
                   rng=rng, log_path=args.log)
    agent.save(args.checkpoint, extra_meta={"episodes": len(curves),
                                            "train_seed": args.seed})
    last = curves[-1]["mean_reward"] if curves else float("nan")
    print(f"trained {args.variant} for {len(curves)} episodes "
          f"(last mean reward {last:.4f}); checkpoint at {args.checkpoint}")
    return 0


def _cmd_eval(args) -> int:
    cfg = _config(args)
    from .agent import Agent
    kind = Agent.load(args.checkpoint, cfg).kind
    records, diag = run_episode(kind, cfg, args.seed, slots=args.slots,
                                checkpoint=args.checkpoint)
    emit(records, args.out, args.format)
    print(f"evaluated {kind} over {diag['slots']} slots -> {args.out} "
          f"(activation_rate={diag['activation_rate']:.4f})")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "sweep-snr":
            return _cmd_sweep(args, "snr")
        if args.command == "sweep-v":
            return _cmd_sweep(args, "v")
        if args.command == "train":
            return _cmd_train(args)
        if args.command == "eval":
            return _cmd_eval(args)
        raise ValueError(f"unknown command {args.command!r}")
    except BrokenPipeError:
        return 1
    except Exception as exc:  # single machine-parsable error line
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
