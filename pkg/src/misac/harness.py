"""Episode runner, Monte-Carlo sweeps, metrics aggregation and persistence.

A slot proceeds: the policy sees the current snapshot (delayed estimates
included), its action is scored by the Lyapunov surrogate on that same
snapshot, then queues, AoI, the virtual energy queue, kinematics and
estimates advance. Every (policy, config, seed) triple is deterministic:
the environment owns one PCG64 stream and policies draw from their own.

CSV schema (fixed): slot,vehicle,policy,seed,pcrb,energy,queue,aoi_tan,
z,p_misa,reward. Floats are written with repr (shortest round-trip
form), so write-read round-trips are bit-exact and reruns byte-identical.
"""

from __future__ import annotations

import dataclasses
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .agent import Agent, observe
from .channel import steering
from .edge import (Action, EnergyLedger, QueueState, SystemState, ledger_step,
                   slot_energy_per_vehicle, step_queue, surrogate_terms)
from .policy import POLICY_NAMES, baseline_policy
from .scenario import SimConfig, make_fleet, step_kinematics, update_estimate
from .sensing import AoIVector, update_aoi

CSV_HEADER = ("slot", "vehicle", "policy", "seed", "pcrb", "energy", "queue",
              "aoi_tan", "z", "p_misa", "reward")
RL_POLICIES = ("ld-hmoe", "ppo-mono", "moe-homo")


@dataclass(frozen=True)
class SlotRecord:
    slot: int
    vehicle: int
    policy: str
    seed: int
    pcrb: float
    energy: float
    queue: float
    aoi_tan: int
    z: float
    p_misa: float
    reward: float


@dataclass(frozen=True)
class ExperimentSpec:
    policies: tuple
    seeds: tuple
    slots: int | None = None
    sweep: str = "none"            # none | snr | v
    grid: tuple = ()
    checkpoint: str | None = None
    jobs: int = 1

    def __post_init__(self):
        if self.sweep not in ("none", "snr", "v"):
            raise ValueError(f"unknown sweep kind {self.sweep!r}")
        if self.sweep != "none" and len(self.grid) == 0:
            raise ValueError("sweep requires a non-empty grid")


class Environment:
    """Stateful slot-by-slot stepper around the pure modules."""

    def __init__(self, cfg: SimConfig, seed: int):
        self.cfg = cfg
        self.seed = seed
        self.reset()

    def reset(self) -> SystemState:
        cfg = self.cfg
        self.rng = np.random.default_rng(np.random.PCG64(self.seed))
        vehicles = tuple(make_fleet(cfg, self.rng))
        self.state = SystemState(
            vehicles=vehicles,
            aoi=tuple(AoIVector(1, 1) for _ in range(cfg.K)),
            queues=tuple(QueueState() for _ in range(cfg.K)),
            z=0.0)
        self.ledger = EnergyLedger()
        self.gains = np.ones(cfg.K)
        self.slot = 0
        self.pcrb_cap_slots = 0
        self.range_clamps = 0
        return self.state

    def step(self, action: Action) -> tuple[SystemState, float, dict]:
        cfg, state = self.cfg, self.state
        terms = surrogate_terms(state, action, cfg)
        reward = -terms["value"]
        self.pcrb_cap_slots += int(np.any(terms["pcrb"] >= cfg.pcrb_cap))

        if cfg.sampled_recovery:
            e_vec = slot_energy_per_vehicle(action.f, terms["p_misa"], cfg,
                                            self.rng)
        else:
            e_vec = terms["e_vec"]
        e_total = float(np.sum(e_vec))
        self.ledger = ledger_step(self.ledger, e_total, cfg)

        new_queues, new_aoi = [], []
        completions = []
        for k in range(cfg.K):
            q, completed, t_queue = step_queue(
                state.queues[k], action.pi[k], float(action.f[k]),
                cfg.tau, cfg.C_k)
            new_queues.append(q)
            new_aoi.append(update_aoi(state.aoi[k], completed, t_queue))
            completions.append(completed)

        # realised beamforming gain of this slot's beams, measured at truth
        for k, veh in enumerate(state.vehicles):
            g = abs(np.vdot(steering(veh.theta, cfg.M), action.v[k])) ** 2
            self.gains[k] = g / cfg.M

        vehicles = []
        for k, veh in enumerate(state.vehicles):
            nxt = step_kinematics(veh, cfg.tau, self.rng, cfg)
            self.range_clamps += int(nxt.range_clamped)
            vehicles.append(nxt)
        vehicles = [update_estimate(v, new_aoi[k], self.rng, cfg)
                    for k, v in enumerate(vehicles)]

        info = {
            "pcrb": terms["pcrb"], "p_misa": terms["p_misa"],
            "e_vec": e_vec, "e_total": e_total,
            "aoi_tan": np.array([a.a_tan for a in state.aoi]),
            "backlog": np.array([q.backlog for q in new_queues]),
            "completed": completions, "z": self.ledger.z, "reward": reward,
        }
        self.state = SystemState(vehicles=tuple(vehicles),
                                 aoi=tuple(new_aoi),
                                 queues=tuple(new_queues),
                                 z=self.ledger.z)
        self.slot += 1
        return self.state, reward, info


class BaselineAdapter:
    """Uniform policy interface over the stateless baselines."""

    def __init__(self, name: str, cfg: SimConfig):
        self.name = name
        self.cfg = cfg
        self._fn = baseline_policy(name)

    def reset(self) -> None:
        pass

    def decide(self, state: SystemState, gains: np.ndarray) -> Action:
        return self._fn(state, self.cfg).action


class AgentAdapter:
    """Frozen-checkpoint (or in-memory) agent driving the environment."""

    def __init__(self, agent: Agent, seed: int, explore: bool = False):
        self.name = agent.kind
        self.agent = agent
        self.seed = seed
        self.explore = explore
        self.reset()

    def reset(self) -> None:
        self.agent.reset_memory()
        # offset keeps the policy stream independent of the env stream
        self.rng = np.random.default_rng(np.random.PCG64(self.seed + 777_000))

    def decide(self, state: SystemState, gains: np.ndarray) -> Action:
        obs = observe(state, gains, self.agent.cfg)
        action, _ = self.agent.act(obs, self.rng, explore=self.explore)
        return self.agent.to_env_action(action)


def make_policy(name: str, cfg: SimConfig, seed: int = 0,
                checkpoint: str | None = None, explore: bool = False):
    if name in RL_POLICIES:
        if checkpoint is None:
            raise ValueError(f"policy {name!r} needs a trained checkpoint")
        agent = Agent.load(checkpoint, cfg)
        if agent.kind != name:
            raise ValueError(f"checkpoint holds {agent.kind!r}, not {name!r}")
        return AgentAdapter(agent, seed=seed, explore=explore)
    if name not in POLICY_NAMES:
        raise ValueError(f"unknown policy {name!r}; expected one of "
                         f"{POLICY_NAMES}")
    return BaselineAdapter(name, cfg)


def run_episode(policy, cfg: SimConfig, seed: int,
                slots: int | None = None,
                checkpoint: str | None = None) -> tuple[list[SlotRecord], dict]:
    """Roll one deterministic episode; returns per (slot, vehicle) records
    plus run diagnostics (activation rate, energy conservation, flags)."""
    if isinstance(policy, str):
        policy = make_policy(policy, cfg, seed=seed, checkpoint=checkpoint)
    n = cfg.N if slots is None else slots
    env = Environment(cfg, seed)
    policy.reset()
    records: list[SlotRecord] = []
    activations = 0
    for t in range(n):
        state = env.state
        action = policy.decide(state, env.gains)
        state, reward, info = env.step(action)
        activations += int(np.sum(action.pi))
        for k in range(cfg.K):
            records.append(SlotRecord(
                slot=t, vehicle=k, policy=policy.name, seed=seed,
                pcrb=float(info["pcrb"][k]), energy=float(info["e_vec"][k]),
                queue=float(info["backlog"][k]),
                aoi_tan=int(info["aoi_tan"][k]), z=float(info["z"]),
                p_misa=float(info["p_misa"][k]), reward=float(reward)))
    diag = {
        "policy": policy.name, "seed": seed, "slots": n,
        "activation_rate": activations / max(1, n * cfg.K),
        "cumulative_energy": env.ledger.cumulative,
        "final_z": env.ledger.z,
        "pcrb_cap_slots": env.pcrb_cap_slots,
        "range_clamps": env.range_clamps,
    }
    return records, diag


# ------------------------------------------------------------ aggregation

def time_averages(records: list[SlotRecord]) -> dict:
    """Per-policy arithmetic means over slots and vehicles plus rolling
    cumulative means (time-average convergence series)."""
    if not records:
        raise ValueError("no records to aggregate")
    by_policy: dict[str, list[SlotRecord]] = {}
    for r in records:
        by_policy.setdefault(r.policy, []).append(r)
    out = {}
    for name, rows in by_policy.items():
        slots = sorted({r.slot for r in rows})
        n_slots = len(slots)
        pcrb = np.array([r.pcrb for r in rows])
        queue = np.array([r.queue for r in rows])
        aoi = np.array([r.aoi_tan for r in rows])
        energy_by_slot = np.zeros(max(slots) + 1)
        for r in rows:
            energy_by_slot[r.slot] += r.energy
        e_slots = energy_by_slot[slots]
        out[name] = {
            "avg_pcrb": float(pcrb.mean()),
            "avg_energy": float(e_slots.mean()),
            "avg_queue": float(queue.mean()),
            "avg_aoi": float(aoi.mean()),
            "n_slots": n_slots,
            "rolling_energy": np.cumsum(e_slots) / np.arange(1, n_slots + 1),
        }
        # per-slot vehicle means, then the running prefix average
        pcrb_slot = np.zeros(max(slots) + 1)
        queue_slot = np.zeros(max(slots) + 1)
        counts = np.zeros(max(slots) + 1)
        for r in rows:
            pcrb_slot[r.slot] += r.pcrb
            queue_slot[r.slot] += r.queue
            counts[r.slot] += 1
        pcrb_slot = pcrb_slot[slots] / counts[slots]
        queue_slot = queue_slot[slots] / counts[slots]
        denom = np.arange(1, n_slots + 1)
        out[name]["rolling_pcrb"] = np.cumsum(pcrb_slot) / denom
        out[name]["rolling_queue"] = np.cumsum(queue_slot) / denom
    return out


def steady_state_pcrb(records: list[SlotRecord], fraction: float = 0.25) -> float:
    """Mean PCRB over the final ``fraction`` of slots (steady state)."""
    if not records:
        raise ValueError("no records")
    last = max(r.slot for r in records)
    cut = last - int((last + 1) * fraction) + 1
    tail = [r.pcrb for r in records if r.slot >= cut]
    return float(np.mean(tail))


def _run_one(args):
    name, cfg, seed, slots, checkpoint = args
    records, diag = run_episode(name, cfg, seed, slots=slots,
                                checkpoint=checkpoint)
    return records, diag


def run_many(policies, cfg: SimConfig, seeds, slots=None,
             checkpoint=None, jobs: int = 1):
    """Episodes across (policy x seed), optionally in parallel; results
    merged in deterministic sorted order."""
    tasks = [(p, cfg, s, slots, checkpoint) for p in policies for s in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_one, tasks))
    else:
        results = [_run_one(t) for t in tasks]
    return {(t[0], t[2]): res for t, res in zip(tasks, results)}


def sweep_snr(spec: ExperimentSpec, cfg: SimConfig) -> list[dict]:
    """Steady-state PCRB and activation rate per policy over an SNR grid
    (dB). Grid must stay within [-10, 40] dB."""
    if any(g < -10 or g > 40 for g in spec.grid):
        raise ValueError("SNR grid must lie within [-10, 40] dB")
    slots = spec.slots or cfg.N
    rows = []
    for snr_db in spec.grid:
        cfg_pt = dataclasses.replace(cfg, eta_rx=10.0 ** (snr_db / 10.0))
        results = run_many(spec.policies, cfg_pt, spec.seeds, slots=slots,
                           checkpoint=spec.checkpoint, jobs=spec.jobs)
        for policy in spec.policies:
            vals = [steady_state_pcrb(results[(policy, s)][0])
                    for s in spec.seeds]
            acts = [results[(policy, s)][1]["activation_rate"]
                    for s in spec.seeds]
            rows.append({"snr_db": float(snr_db), "policy": policy,
                         "pcrb_steady_mean": float(np.mean(vals)),
                         "pcrb_steady_std": float(np.std(vals)),
                         "activation_rate": float(np.mean(acts))})
    return rows


def sweep_v(spec: ExperimentSpec, cfg: SimConfig) -> list[dict]:
    """Average PCRB and queue length per Lyapunov weight V (greedy-dpp by
    default): the classic O(1/V) accuracy vs O(V) backlog trade."""
    if any(v < 0 for v in spec.grid):
        raise ValueError("V grid must be non-negative")
    slots = spec.slots or cfg.N
    policies = spec.policies or ("greedy-dpp",)
    rows = []
    for v in spec.grid:
        cfg_pt = dataclasses.replace(cfg, V=float(v))
        results = run_many(policies, cfg_pt, spec.seeds, slots=slots,
                           checkpoint=spec.checkpoint, jobs=spec.jobs)
        for policy in policies:
            pcrbs, queues, acts = [], [], []
            for s in spec.seeds:
                records, diag = results[(policy, s)]
                avg = time_averages(records)[policy]
                pcrbs.append(avg["avg_pcrb"])
                queues.append(avg["avg_queue"])
                acts.append(diag["activation_rate"])
            rows.append({"V": float(v), "policy": policy,
                         "avg_pcrb": float(np.mean(pcrbs)),
                         "avg_queue": float(np.mean(queues)),
                         "activation_rate": float(np.mean(acts))})
    return rows


# ------------------------------------------------------------ persistence

def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def emit(rows, path, fmt: str = "csv") -> Path:
    """Write records or summary rows. Records use the fixed CSV header;
    floats keep full precision so round-trips are bit-exact."""
    path = Path(path)
    if path.parent and not path.parent.exists():
        raise FileNotFoundError(f"output directory {path.parent} does not exist")
    is_records = (not rows) or isinstance(rows[0], SlotRecord)
    if fmt == "csv":
        lines = []
        if is_records:
            lines.append(",".join(CSV_HEADER))
            for r in rows:
                lines.append(",".join(_fmt(getattr(r, c)) for c in CSV_HEADER))
        else:
            keys = list(rows[0].keys())
            lines.append(",".join(keys))
            for r in rows:
                lines.append(",".join(_fmt(r[k]) for k in keys))
        path.write_text("\n".join(lines) + "\n")
    elif fmt == "json":
        payload = [dataclasses.asdict(r) for r in rows] if is_records \
            else list(rows)
        path.write_text(json.dumps(payload, indent=1) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return path


def read_records(path) -> list[SlotRecord]:
    """Parse a records CSV back; inverse of ``emit(..., 'csv')``."""
    text = Path(path).read_text().strip().splitlines()
    if not text or text[0] != ",".join(CSV_HEADER):
        raise ValueError(f"{path}: not a records CSV (bad header)")
    out = []
    for line in text[1:]:
        parts = line.split(",")
        out.append(SlotRecord(
            slot=int(parts[0]), vehicle=int(parts[1]), policy=parts[2],
            seed=int(parts[3]), pcrb=float(parts[4]), energy=float(parts[5]),
            queue=float(parts[6]), aoi_tan=int(parts[7]), z=float(parts[8]),
            p_misa=float(parts[9]), reward=float(parts[10])))
    return out
