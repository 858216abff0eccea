"""Semantic age of information, spatial uncertainty, misalignment and PCRB.

The AoI is a two-vector: the radial component refreshes every slot (radar
runs continuously), the tangential component is refreshed only when a
visual task clears the edge-computing queue. Uncertainty grows with AoI,
drives both the beam-misalignment probability and the prior Fisher
information, and the angular posterior Cramer-Rao bound combines that
prior with the beam-dependent data FIM.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .scenario import SimConfig

DEFAULT_PCRB_CAP = 1e2


@dataclass(frozen=True)
class AoIVector:
    """Ages of the radial (radar) and tangential (camera) observations, slots."""

    a_rad: int = 1
    a_tan: int = 1

    def __post_init__(self):
        if self.a_rad < 1 or self.a_tan < 1:
            raise ValueError("AoI components are at least one slot")


@dataclass(frozen=True)
class UncertaintyPair:
    """Radial / tangential position uncertainty (standard deviations, m)."""

    sigma_rad: float
    sigma_tan: float


@dataclass(frozen=True)
class Fim2x2:
    """Diagonal 2x2 Fisher information: j11 in 1/rad^2, j22 in 1/m^2."""

    j11: float
    j22: float

    def __post_init__(self):
        if self.j11 < 0 or self.j22 < 0:
            raise ValueError("Fisher information entries must be non-negative")

    def __add__(self, other: "Fim2x2") -> "Fim2x2":
        return Fim2x2(self.j11 + other.j11, self.j22 + other.j22)


def update_aoi(aoi: AoIVector, task_completed: bool, t_queue: int = 0) -> AoIVector:
    """One-slot AoI evolution: the radial age resets to 1 unconditionally;
    the tangential age resets to the completed task's queue sojourn when a
    visual task finishes, otherwise it grows by one."""
    if task_completed:
        if t_queue < 1:
            raise ValueError("t_queue must be >= 1 when a task completes")
        return AoIVector(a_rad=1, a_tan=t_queue)
    return AoIVector(a_rad=1, a_tan=aoi.a_tan + 1)


def uncertainty(aoi: AoIVector, u_rad: float, u_tan: float,
                cfg: "SimConfig") -> UncertaintyPair:
    """Map AoI and speeds to position uncertainty:
    sigma^2 = (c * u * age)^2 + floor^2 per component."""
    var_rad = (cfg.c_rad * u_rad * aoi.a_rad) ** 2 + cfg.eps_rad ** 2
    var_tan = (cfg.c_tan * u_tan * aoi.a_tan) ** 2 + cfg.eps_cam ** 2
    return UncertaintyPair(sigma_rad=math.sqrt(var_rad),
                           sigma_tan=math.sqrt(var_tan))


def q_function(x: float) -> float:
    """Standard normal tail probability Q(x) = P(N(0,1) > x)."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))


# Abramowitz & Stegun 26.2.17 polynomial, |error| < 7.5e-8.
_AS_COEF = (0.319381530, -0.356563782, 1.781477937, -1.821255978, 1.330274429)


def q_function_rational(x: float) -> float:
    """Rational-approximation fallback for Q(x), accurate to ~1e-7 absolute."""
    if x < 0:
        return 1.0 - q_function_rational(-x)
    t = 1.0 / (1.0 + 0.2316419 * x)
    poly = 0.0
    for c in reversed(_AS_COEF):
        poly = t * (c + poly)
    pdf = math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
    return pdf * poly


def misalignment_probability(sigma_tan: float, d: float, theta_BW: float) -> float:
    """Probability that the Gaussian angular error sigma_tan/d exceeds half
    the half-power beamwidth: 2 Q(theta_BW d / (2 sigma_tan)), clamped to
    [0, 1]."""
    if sigma_tan <= 0 or d <= 0 or theta_BW <= 0:
        raise ValueError("sigma_tan, d and theta_BW must be positive")
    p = 2.0 * q_function(theta_BW * d / (2.0 * sigma_tan))
    return min(1.0, max(0.0, p))


def data_fim(v: np.ndarray, theta: float, cfg: "SimConfig") -> Fim2x2:
    """Measurement Fisher information of the active beam:
    j11 = eta * beta_theta * |adot^H v|^2, j22 = eta * beta_d * |a^H v|^2."""
    from .channel import steering, steering_derivative

    a = steering(theta, cfg.M)
    adot = steering_derivative(theta, cfg.M)
    j11 = cfg.eta_rx * cfg.beta_theta * abs(np.vdot(adot, v)) ** 2
    j22 = cfg.eta_rx * cfg.beta_d * abs(np.vdot(a, v)) ** 2
    return Fim2x2(j11=j11, j22=j22)


def prior_fim(unc: UncertaintyPair, d: float) -> Fim2x2:
    """Prior Fisher information from the historical state: the angular entry
    is d^2 / sigma_tan^2 (the same tangential spread subtends a smaller
    angle at range), the range entry 1 / sigma_rad^2."""
    if unc.sigma_rad <= 0 or unc.sigma_tan <= 0 or d <= 0:
        raise ValueError("sigma components and d must be positive")
    return Fim2x2(j11=d * d / (unc.sigma_tan ** 2),
                  j22=1.0 / (unc.sigma_rad ** 2))


def pcrb_theta(data: Fim2x2, prior: Fim2x2,
               cap: float = DEFAULT_PCRB_CAP) -> float:
    """Angular PCRB: the (1,1) entry of the inverse combined FIM, i.e.
    1 / (data.j11 + prior.j11) for the diagonal case, saturating at ``cap``
    when the total information vanishes."""
    total = data.j11 + prior.j11
    if total <= 0 or 1.0 / total >= cap:
        return cap
    return 1.0 / total


def pcrb_range(data: Fim2x2, prior: Fim2x2,
               cap: float = DEFAULT_PCRB_CAP) -> float:
    """Range PCRB (diagnostic only; never enters any objective)."""
    total = data.j22 + prior.j22
    if total <= 0 or 1.0 / total >= cap:
        return cap
    return 1.0 / total
