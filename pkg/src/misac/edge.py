"""Edge-computing queues, energy accounting and the Lyapunov surrogate.

The per-vehicle computing queue holds cycles of in-flight visual tasks;
service-then-arrival within a slot, so a task scheduled this slot starts
being served next slot. A single system-wide virtual deficit queue Z
accumulates energy overdraft above the per-slot budget; the
drift-plus-penalty surrogate prices queue growth by Q and energy by Z.

Inside the surrogate the queue quantities are divided by
``cfg.queue_scale`` and the energy quantities by ``cfg.energy_scale``
(defaults: one task of C_k cycles, one budget of E_budget Joules) so
all three terms are commensurate on desk-scale horizons; unit scales
recover the raw objective.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .sensing import (misalignment_probability, data_fim, prior_fim,
                      pcrb_theta, uncertainty)

if TYPE_CHECKING:
    from .scenario import SimConfig


class ConstraintViolation(ValueError):
    """An action violates the hard feasibility constraints."""


@dataclass(frozen=True)
class QueueState:
    """Backlog of one vehicle's visual tasks, cycles; ``pending_task_age``
    is the age in slots of the oldest unfinished task (None iff empty)."""

    backlog: float = 0.0
    pending_task_age: int | None = None

    def __post_init__(self):
        if self.backlog < 0:
            raise ValueError("backlog must be non-negative")
        if (self.backlog == 0) != (self.pending_task_age is None):
            raise ValueError("pending_task_age must be set iff backlog > 0")


@dataclass(frozen=True)
class EnergyLedger:
    """Per-slot system energy, virtual deficit queue and running total, J."""

    e_slot: float = 0.0
    z: float = 0.0
    cumulative: float = 0.0

    def __post_init__(self):
        if self.z < 0:
            raise ValueError("virtual queue must be non-negative")


@dataclass(frozen=True)
class Action:
    """Joint decision: binary camera schedule, CPU split, analog beams."""

    pi: tuple            # K flags in {0, 1}
    f: np.ndarray        # K CPU frequencies, cycles/s
    v: np.ndarray        # K x M complex beamformers, |v_km| = 1/sqrt(M)


@dataclass(frozen=True)
class SystemState:
    """Snapshot consumed by the surrogate objective and the policies."""

    vehicles: tuple      # K VehicleState
    aoi: tuple           # K AoIVector
    queues: tuple        # K QueueState
    z: float             # virtual energy deficit, J


def validate_action(action: Action, cfg: "SimConfig") -> None:
    """Raise ConstraintViolation unless the action is feasible: CPU within
    F_max, exact constant modulus, binary schedule, non-negative split."""
    K, M = cfg.K, cfg.M
    if len(action.pi) != K or len(action.f) != K or action.v.shape != (K, M):
        raise ConstraintViolation("action dimensions do not match the config")
    if any(p not in (0, 1) for p in action.pi):
        raise ConstraintViolation("schedule flags must be binary")
    if np.any(np.asarray(action.f) < 0):
        raise ConstraintViolation("CPU frequencies must be non-negative")
    slack = max(1e-9, cfg.F_max * 1e-12)
    if float(np.sum(action.f)) > cfg.F_max + slack:
        raise ConstraintViolation("total CPU frequency exceeds F_max")
    target = 1.0 / math.sqrt(M)
    dev = float(np.max(np.abs(np.abs(action.v) - target)))
    if dev > 1e-12:
        raise ConstraintViolation(f"constant-modulus violation: {dev:.3e}")


def step_queue(q: QueueState, pi: int, f: float, tau: float,
               C: float) -> tuple[QueueState, bool, int]:
    """One slot of queue evolution: serve f*tau cycles, then append the new
    arrival pi*C. Completion fires when a non-empty backlog fully drains;
    the returned sojourn is the oldest task's age plus the serving slot."""
    if f < 0:
        raise ValueError("service frequency must be non-negative")
    completed = q.backlog > 0 and q.backlog - f * tau <= 0
    t_queue = (q.pending_task_age + 1) if completed else 0
    mid = max(0.0, q.backlog - f * tau)
    backlog = mid + pi * C
    if backlog == 0:
        age = None
    elif mid > 0:
        age = q.pending_task_age + 1
    else:
        age = 0
    return QueueState(backlog=backlog, pending_task_age=age), completed, t_queue


def slot_energy_per_vehicle(f: Sequence[float], p_misa: Sequence[float],
                            cfg: "SimConfig",
                            rng: np.random.Generator | None = None) -> np.ndarray:
    """Per-vehicle slot energy: cubic DVFS computing power plus the beam
    recovery penalty (expected by default; Bernoulli-sampled when
    ``cfg.sampled_recovery`` and an rng is supplied)."""
    f = np.asarray(f, dtype=float)
    p = np.asarray(p_misa, dtype=float)
    if np.any(f < 0):
        raise ValueError("frequencies must be non-negative")
    if np.any((p < 0) | (p > 1)):
        raise ValueError("misalignment probabilities must lie in [0, 1]")
    compute = cfg.kappa * f ** 3 * cfg.tau
    if cfg.sampled_recovery and rng is not None:
        recovery = cfg.E_recovery * (rng.random(p.shape) < p)
    else:
        recovery = p * cfg.E_recovery
    return compute + recovery


def slot_energy(f: Sequence[float], p_misa: Sequence[float], cfg: "SimConfig",
                rng: np.random.Generator | None = None) -> float:
    """Total system energy for the slot, J."""
    return float(np.sum(slot_energy_per_vehicle(f, p_misa, cfg, rng)))


def step_virtual_queue(z: float, e_slot: float, e_budget: float) -> float:
    """Virtual deficit update max(0, z + e - budget)."""
    if z < 0:
        raise ValueError("virtual queue must be non-negative")
    return max(0.0, z + e_slot - e_budget)


def ledger_step(ledger: EnergyLedger, e_slot: float, cfg: "SimConfig") -> EnergyLedger:
    return EnergyLedger(e_slot=e_slot,
                        z=step_virtual_queue(ledger.z, e_slot, cfg.E_budget),
                        cumulative=ledger.cumulative + e_slot)


def lyapunov(backlogs: Sequence[float], z: float) -> float:
    """Joint quadratic congestion measure 0.5 sum Q^2 + 0.5 z^2."""
    q = np.asarray(backlogs, dtype=float)
    return 0.5 * float(np.sum(q * q)) + 0.5 * z * z


def state_pcrbs(state: SystemState, beams: np.ndarray, cfg: "SimConfig") -> np.ndarray:
    """Angular PCRB per vehicle for the given beams at the current state."""
    out = np.empty(len(state.vehicles))
    for k, veh in enumerate(state.vehicles):
        unc = uncertainty(state.aoi[k], veh.u_rad, veh.u_tan, cfg)
        out[k] = pcrb_theta(data_fim(beams[k], veh.theta, cfg),
                            prior_fim(unc, veh.d), cap=cfg.pcrb_cap)
    return out


def surrogate_terms(state: SystemState, action: Action,
                    cfg: "SimConfig") -> dict:
    """Evaluate the drift-plus-penalty surrogate and return its breakdown."""
    validate_action(action, cfg)
    qs, es = cfg.queue_scale, cfg.energy_scale
    pcrbs = np.empty(cfg.K)
    p_misa = np.empty(cfg.K)
    for k, veh in enumerate(state.vehicles):
        unc = uncertainty(state.aoi[k], veh.u_rad, veh.u_tan, cfg)
        pcrbs[k] = pcrb_theta(data_fim(action.v[k], veh.theta, cfg),
                              prior_fim(unc, veh.d), cap=cfg.pcrb_cap)
        p_misa[k] = misalignment_probability(unc.sigma_tan, veh.d, cfg.theta_BW)
    e_vec = slot_energy_per_vehicle(action.f, p_misa, cfg)
    e_total = float(np.sum(e_vec))
    queue_term = 0.0
    for k, q in enumerate(state.queues):
        delta = action.pi[k] * cfg.C_k - action.f[k] * cfg.tau
        queue_term += (q.backlog / qs) * (delta / qs)
    pcrb_term = cfg.V * float(np.sum(pcrbs))
    energy_term = (state.z / es) * (e_total / es)
    return {
        "value": pcrb_term + queue_term + energy_term,
        "pcrb_term": pcrb_term,
        "queue_term": queue_term,
        "energy_term": energy_term,
        "pcrb": pcrbs,
        "p_misa": p_misa,
        "e_vec": e_vec,
        "e_total": e_total,
    }


def surrogate_objective(state: SystemState, action: Action,
                        cfg: "SimConfig") -> float:
    """Per-slot surrogate V * sum PCRB + sum Q (pi C - f tau) + Z * E, with
    queue and energy quantities on the configured scales. Infeasible
    actions raise instead of being projected."""
    return surrogate_terms(state, action, cfg)["value"]


def reward(state: SystemState, action: Action, cfg: "SimConfig") -> float:
    """Negative surrogate: maximising the return minimises long-term PCRB
    subject to the queue and energy prices."""
    return -surrogate_objective(state, action, cfg)
