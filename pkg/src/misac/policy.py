"""Baseline policies, constant-modulus beams and the greedy per-slot solver.

All policies emit feasible actions by construction: beams are phase-only
(exact constant modulus) and CPU splits never exceed F_max.

The greedy scheduler minimises a per-slot decision objective that makes
the activation benefit visible one slot ahead: the PCRB term is scored at
the tangential age the schedule induces (reset to 1 on activation, else
age + 1), and each activation is charged the expected processing energy
of its task at the even-share frequency. The CPU split enters only
through the concave queue-credit / cubic-energy trade, so a greedy ladder
over a quantised grid is exactly optimal and the whole two-stage search
matches joint brute-force enumeration.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .edge import Action, SystemState
from .sensing import (AoIVector, data_fim, misalignment_probability,
                      pcrb_theta, prior_fim, uncertainty)

if TYPE_CHECKING:
    from .scenario import SimConfig

POLICY_NAMES = ("vision-only", "radar-only", "greedy-dpp",
                "ld-hmoe", "ppo-mono", "moe-homo")


@dataclass(frozen=True)
class Beamformer:
    """Phase-only beamformer: v_m = exp(j phase_m) / sqrt(M)."""

    phases: np.ndarray

    def vector(self) -> np.ndarray:
        return np.exp(1j * self.phases) / math.sqrt(len(self.phases))


@dataclass(frozen=True)
class PolicyDecision:
    action: Action
    diagnostics: dict


def conjugate_beam(theta_hat: float, M: int) -> Beamformer:
    """Conjugate (matched) beam toward the estimated azimuth: v = a(theta_hat)
    / sqrt(M), the constant-modulus maximiser of |a(theta_hat)^H v|."""
    m = np.arange(M)
    return Beamformer(phases=np.pi * m * np.sin(theta_hat))


def project_constant_modulus(raw: np.ndarray) -> Beamformer:
    """Nearest constant-modulus point in the Euclidean sense: keep each
    entry's argument; zero entries map to phase 0."""
    return Beamformer(phases=np.where(np.abs(raw) > 0, np.angle(raw), 0.0))


def _beam_matrix(state: SystemState, cfg: "SimConfig") -> np.ndarray:
    return np.stack([conjugate_beam(v.theta_hat, cfg.M).vector()
                     for v in state.vehicles])


def _even_split(cfg: "SimConfig") -> np.ndarray:
    f = np.full(cfg.K, cfg.F_max / cfg.K)
    s = float(f.sum())
    if s > cfg.F_max:
        f *= cfg.F_max / s
    return f


def vision_only(state: SystemState, cfg: "SimConfig") -> PolicyDecision:
    """Continuous visual activation with an even CPU split."""
    action = Action(pi=(1,) * cfg.K, f=_even_split(cfg),
                    v=_beam_matrix(state, cfg))
    return PolicyDecision(action=action, diagnostics={"policy": "vision-only"})


def radar_only(state: SystemState, cfg: "SimConfig") -> PolicyDecision:
    """No visual tasks, no computing; beams toward the delayed estimates."""
    action = Action(pi=(0,) * cfg.K, f=np.zeros(cfg.K),
                    v=_beam_matrix(state, cfg))
    return PolicyDecision(action=action, diagnostics={"policy": "radar-only"})


def activation_energy(cfg: "SimConfig") -> float:
    """Expected processing energy committed by scheduling one task,
    evaluated at the drain-in-one-slot frequency: kappa (C/tau)^2 C."""
    return cfg.kappa * (cfg.C_k / cfg.tau) ** 2 * cfg.C_k


def decision_objective(state: SystemState, pi: tuple, f: np.ndarray,
                       cfg: "SimConfig") -> float:
    """Per-slot objective the greedy scheduler minimises (beams fixed to
    conjugate).

    Departures from the raw surrogate keep the schedule's benefit and
    costs visible one slot ahead while staying separable in (pi, f): the
    PCRB term is scored at the tangential age the schedule induces (1 on
    activation, age + 1 otherwise), but only while the post-arrival
    backlog is drainable within one slot at full capacity — a task that
    cannot complete promptly refreshes nothing; each activation is
    charged the processing energy of its task; the service credit
    saturates at the existing backlog (cycles beyond a full drain are
    wasted). The energy price carries a constant deficit floor so that
    the scheduler is never energy-blind at Z = 0.
    """
    qs, es = cfg.queue_scale, cfg.energy_scale
    price = (state.z + cfg.energy_price_floor) / es
    value = 0.0
    e_hat = 0.0
    for k, veh in enumerate(state.vehicles):
        aoi = state.aoi[k]
        drainable = state.queues[k].backlog + cfg.C_k <= cfg.F_max * cfg.tau
        a_eff = 1 if (pi[k] and drainable) else aoi.a_tan + 1
        unc_now = uncertainty(aoi, veh.u_rad, veh.u_tan, cfg)
        unc_eff = uncertainty(AoIVector(1, a_eff), veh.u_rad, veh.u_tan, cfg)
        beam = conjugate_beam(veh.theta_hat, cfg.M).vector()
        pcrb = pcrb_theta(data_fim(beam, veh.theta, cfg),
                          prior_fim(unc_eff, veh.d), cap=cfg.pcrb_cap)
        value += cfg.V * pcrb
        q = state.queues[k].backlog
        served = min(f[k] * cfg.tau, q)
        value += (q / qs) * ((pi[k] * cfg.C_k - served) / qs)
        p_misa = misalignment_probability(unc_now.sigma_tan, veh.d, cfg.theta_BW)
        e_hat += (cfg.kappa * f[k] ** 3 * cfg.tau
                  + pi[k] * activation_energy(cfg)
                  + p_misa * cfg.E_recovery)
    value += price * (e_hat / es)
    return value


def _ladder_split(state: SystemState, cfg: "SimConfig",
                  levels: int) -> np.ndarray:
    """Greedy incremental CPU allocation over a uniform grid of
    ``levels`` steps of F_max/levels, prioritising the largest positive
    marginal gain: the backlog-saturated queue credit against the
    deficit-priced cubic energy increment. Exact for this concave
    separable trade; ties prefer the lower level, then the lower index."""
    qs, es = cfg.queue_scale, cfg.energy_scale
    price = (state.z + cfg.energy_price_floor) / es
    df = cfg.F_max / levels
    lev = np.zeros(cfg.K, dtype=int)

    def marginal(k: int) -> float:
        q = state.queues[k].backlog
        s0 = min(lev[k] * df * cfg.tau, q)
        s1 = min((lev[k] + 1) * df * cfg.tau, q)
        credit = (q / qs) * ((s1 - s0) / qs)
        f0 = lev[k] * df
        f1 = f0 + df
        cost = price * (cfg.kappa * (f1 ** 3 - f0 ** 3) * cfg.tau / es)
        return credit - cost

    for _ in range(levels):
        best = None
        for k in range(cfg.K):
            if lev[k] >= levels:
                continue
            g = marginal(k)
            if g > 0 and (best is None or (-g, lev[k], k) < best[0]):
                best = ((-g, lev[k], k), k)
        if best is None:
            break
        lev[best[1]] += 1
    return lev * df


def greedy_dpp(state: SystemState, cfg: "SimConfig") -> PolicyDecision:
    """Per-slot minimiser of the decision objective: conjugate beams,
    exhaustive schedule search, greedy-ladder CPU split."""
    if cfg.K > cfg.greedy_k_cutoff:
        raise ValueError(f"exhaustive schedule search refused for K={cfg.K} "
                         f"(cutoff {cfg.greedy_k_cutoff})")
    f = _ladder_split(state, cfg, cfg.cpu_levels)
    best_pi, best_val = None, math.inf
    for pi in itertools.product((0, 1), repeat=cfg.K):
        val = decision_objective(state, pi, f, cfg)
        if best_pi is None or val < best_val:
            best_pi, best_val = pi, val
    beams = _beam_matrix(state, cfg)
    if cfg.beam_search:
        beams = _refine_beams(state, beams, cfg)
    action = Action(pi=best_pi, f=f, v=beams)
    return PolicyDecision(action=action,
                          diagnostics={"policy": "greedy-dpp",
                                       "objective": best_val})


def brute_force_dpp(state: SystemState, cfg: "SimConfig",
                    levels: int | None = None) -> PolicyDecision:
    """Joint enumeration oracle over every (schedule, CPU-grid) pair.

    Tie-breaking mirrors the two-stage search: lexicographically smallest
    schedule, then lexicographically largest level vector (allocation
    preference to lower-index vehicles).
    """
    L = cfg.cpu_levels if levels is None else levels
    df = cfg.F_max / L
    level_vectors = [lv for lv in itertools.product(range(L + 1), repeat=cfg.K)
                     if sum(lv) <= L]
    best = None
    for pi in itertools.product((0, 1), repeat=cfg.K):
        for lv in level_vectors:
            f = np.asarray(lv, dtype=float) * df
            val = decision_objective(state, pi, f, cfg)
            key = (val, pi, tuple(-l for l in lv))
            if best is None or key < best[0]:
                best = (key, pi, f, val)
    _, pi, f, val = best
    action = Action(pi=pi, f=f, v=_beam_matrix(state, cfg))
    return PolicyDecision(action=action,
                          diagnostics={"policy": "brute-force",
                                       "objective": val})


def _refine_beams(state: SystemState, beams: np.ndarray,
                  cfg: "SimConfig", iters: int = 20) -> np.ndarray:
    """Validation-only local search: random phase perturbations accepted
    when they increase the angular data information toward the estimate."""
    rng = np.random.default_rng(0)
    out = beams.copy()
    for k, veh in enumerate(state.vehicles):
        best = data_fim(out[k], veh.theta_hat, cfg).j11
        phases = np.angle(out[k])
        for _ in range(iters):
            cand = phases + rng.normal(0.0, 0.05, size=cfg.M)
            vec = np.exp(1j * cand) / math.sqrt(cfg.M)
            j11 = data_fim(vec, veh.theta_hat, cfg).j11
            if j11 > best:
                best, phases = j11, cand
        out[k] = np.exp(1j * phases) / math.sqrt(cfg.M)
    return out


_BASELINES = {
    "vision-only": vision_only,
    "radar-only": radar_only,
    "greedy-dpp": greedy_dpp,
}


def baseline_policy(name: str):
    """Look up a non-learning policy callable by CLI name."""
    try:
        return _BASELINES[name]
    except KeyError:
        raise ValueError(f"unknown baseline policy {name!r}; "
                         f"expected one of {sorted(_BASELINES)}") from None
