"""Simulation constants and ground-truth vehicle kinematics.

Units are SI throughout: seconds, meters, Hertz, Joules, CPU cycles. The
base station sits at the origin with a uniform linear array; vehicles move
along a straight road segment parallel to the array at a fixed lateral
offset, wrapping around at the segment ends so the geometry stays
stationary over long runs.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .sensing import AoIVector


class ConfigError(ValueError):
    """Raised for malformed or unknown configuration input."""


@dataclass(frozen=True)
class SimConfig:
    """All physical and algorithmic constants of the simulation.

    Fields left at ``None`` are derived in ``__post_init__``:
    ``theta_BW`` defaults to 2/M rad, ``c_rad``/``c_tan`` to the slot
    duration, and the surrogate normalisation scales to ``C_k`` and
    ``E_budget``. Setting ``queue_scale = energy_scale = 1`` recovers the
    raw drift-plus-penalty objective in cycles/Joules.
    """

    # array / fleet / horizon
    M: int = 64                      # antenna elements
    K: int = 4                       # vehicles
    N: int = 20000                   # horizon, slots
    tau: float = 1e-3                # slot duration, s
    f_c: float = 28e9                # carrier frequency, Hz

    # edge computing and energy
    F_max: float = 10e9              # aggregate CPU frequency, cycles/s
    kappa: float = 4e-25             # effective capacitance, J s^2 / cycles^3
    C_k: float = 2e6                 # visual task size, cycles
    E_recovery: float = 0.5          # beam-recovery energy, J
    E_budget: float = 20.0           # per-slot average energy budget, J
    P_max_dbm: float = 30.0          # transmit power budget, dBm (documentation only)

    # sensing / waveform
    theta_BW: float | None = None    # half-power beamwidth, rad (default 2/M)
    eta_rx: float = 10.0             # linear receive SNR (10 dB)
    beta_theta: float = 3.5e-4       # waveform constant, angular data FIM
    beta_d: float = 3.5e-4           # waveform constant, range data FIM
    eps_rad: float = 0.1             # radial uncertainty floor, m
    eps_cam: float = 0.1             # tangential (camera) uncertainty floor, m
    c_rad: float | None = None       # AoI-to-meters constant, radial (default tau)
    c_tan: float | None = None       # AoI-to-meters constant, tangential (default tau)
    pcrb_cap: float = 1e2            # saturating PCRB for zero-information slots, rad^2

    # Lyapunov surrogate
    V: float = 1.6e4                 # penalty weight on the PCRB term
    queue_scale: float | None = None   # divisor on queue quantities (default C_k)
    energy_scale: float | None = None  # divisor on energy quantities (default E_budget)
    sampled_recovery: bool = False     # Bernoulli-sample recovery events instead of expectation
    energy_price_floor: float = 5.0    # constant deficit offset in the greedy price, J

    # road geometry and mobility
    road_offset: float = 50.0        # lateral distance from the array, m
    road_length: float = 80.0        # wrap-around segment length, m
    speed_mean: float = 15.0         # longitudinal speed, m/s
    speed_jitter: float = 1.0        # per-slot speed perturbation std, m/s
    d_min: float = 1.0               # minimum range clamp, m

    # greedy scheduler
    cpu_levels: int = 8              # CPU quantisation levels per vehicle
    greedy_k_cutoff: int = 12        # refuse exhaustive search above this K
    beam_search: bool = False        # local phase-perturbation search (validation)

    # agent / training
    hidden_temporal: int = 128       # temporal expert hidden width
    hidden_spatial: int = 256        # spatial expert hidden width
    lr: float = 1e-4                 # Adam learning rate
    discount: float = 0.99           # reward discount
    clip_ratio: float = 0.2          # PPO clipped-surrogate ratio
    entropy_coef: float = 1e-3       # entropy bonus weight
    spatial_weight: float = 1.0      # beam-gain refinement weight (lambda)
    bptt_window: int = 32            # truncated backpropagation window, slots
    ppo_epochs: int = 4              # gradient passes per episode

    rng_seed: int = 0

    def __post_init__(self):
        if self.M < 1 or self.K < 1:
            raise ConfigError("M and K must be at least 1")
        if self.theta_BW is None:
            object.__setattr__(self, "theta_BW", 2.0 / self.M)
        if self.c_rad is None:
            object.__setattr__(self, "c_rad", self.tau)
        if self.c_tan is None:
            object.__setattr__(self, "c_tan", self.tau)
        if self.queue_scale is None:
            object.__setattr__(self, "queue_scale", self.C_k)
        if self.energy_scale is None:
            object.__setattr__(self, "energy_scale", self.E_budget)
        if self.tau <= 0 or self.F_max <= 0 or self.E_budget <= 0:
            raise ConfigError("tau, F_max and E_budget must be positive")
        if not 0.0 < self.theta_BW < math.pi:
            raise ConfigError("theta_BW must lie in (0, pi)")
        if self.eta_rx < 0 or self.V < 0:
            raise ConfigError("eta_rx and V must be non-negative")


def default_config() -> SimConfig:
    """Published constants (M=64, f_c=28 GHz, K=4, 10 dB SNR, 20 J budget)
    plus the documented defaults for everything the source system leaves open."""
    return SimConfig()


def make_config(**overrides) -> SimConfig:
    """Build a config from defaults with field overrides, re-deriving the
    dependent defaults (beamwidth, AoI constants, scales) afterwards."""
    valid = {f.name for f in dataclasses.fields(SimConfig)}
    unknown = set(overrides) - valid
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    return SimConfig(**overrides)


_BOOL_WORDS = {"true": True, "false": False, "1": True, "0": False,
               "yes": True, "no": False}


def _coerce(name: str, raw: str, typ) -> object:
    raw = raw.strip()
    if typ is bool:
        try:
            return _BOOL_WORDS[raw.lower()]
        except KeyError:
            raise ConfigError(f"{name}: expected a boolean, got {raw!r}") from None
    if typ is int:
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{name}: expected an integer, got {raw!r}") from None
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{name}: expected a number, got {raw!r}") from None


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines (``#`` comments allowed) into typed overrides."""
    types = {}
    for f in dataclasses.fields(SimConfig):
        t = f.type if isinstance(f.type, str) else getattr(f.type, "__name__", "float")
        base = t.split("|")[0].strip()
        types[f.name] = {"int": int, "bool": bool}.get(base, float)
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        if key not in types:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        out[key] = _coerce(key, value, types[key])
    return out


def load_config(path: str | Path, **overrides) -> SimConfig:
    """Load a key-value config file; keyword overrides win over the file."""
    file_values = parse_config_text(Path(path).read_text())
    file_values.update(overrides)
    return make_config(**file_values)


@dataclass(frozen=True)
class VehicleState:
    """Ground-truth kinematics of one vehicle plus the BS-side delayed estimate.

    ``(u_rad, u_tan)`` is the velocity resolved in the polar frame at the
    current position; ``theta`` is azimuth relative to array broadside, so
    it stays in (-pi/2, pi/2) while the vehicle is in front of the array.
    """

    x: float
    y: float
    vx: float                 # longitudinal (along-road) nominal speed, m/s
    d: float
    theta: float
    u_rad: float
    u_tan: float
    d_hat: float
    theta_hat: float
    range_clamped: bool = False


def vehicle_from_position(x: float, y: float, vx: float, *,
                          d_min: float = 1.0,
                          inst_speed: float | None = None) -> VehicleState:
    """Derive the polar-frame state from Cartesian position and speed.

    ``inst_speed`` is the instantaneous longitudinal speed used for the
    resolved velocity components (defaults to the nominal ``vx``).
    """
    v = vx if inst_speed is None else inst_speed
    d = math.hypot(x, y)
    clamped = False
    if d < d_min:
        d = d_min
        clamped = True
    theta = math.atan2(x, y)
    u_rad = v * x / d
    u_tan = v * y / d
    return VehicleState(x=x, y=y, vx=vx, d=d, theta=theta,
                        u_rad=u_rad, u_tan=u_tan,
                        d_hat=d, theta_hat=theta, range_clamped=clamped)


def step_kinematics(state: VehicleState, tau: float,
                    rng: np.random.Generator, cfg: SimConfig) -> VehicleState:
    """Advance one slot: nominal speed plus a zero-mean Gaussian perturbation,
    wrapping at the road-segment ends; polar quantities are recomputed from
    the new geometry. A pass through the array origin clamps the range at
    ``cfg.d_min`` and flags the state."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    v = state.vx
    if cfg.speed_jitter > 0:
        v = v + cfg.speed_jitter * rng.standard_normal()
    x = state.x + v * tau
    half = cfg.road_length / 2.0
    if x > half:
        x -= cfg.road_length
    elif x < -half:
        x += cfg.road_length
    new = vehicle_from_position(x, state.y, state.vx,
                                d_min=cfg.d_min, inst_speed=v)
    return dataclasses.replace(new, d_hat=state.d_hat, theta_hat=state.theta_hat)


def update_estimate(state: VehicleState, aoi: "AoIVector",
                    rng: np.random.Generator, cfg: SimConfig) -> VehicleState:
    """Redraw the BS-side delayed estimate around the truth with the
    AoI-driven standard deviations: range noise sigma_rad, angular noise
    sigma_tan / d."""
    from .sensing import uncertainty

    if aoi.a_rad < 1 or aoi.a_tan < 1:
        raise ValueError("AoI components must be at least one slot")
    unc = uncertainty(aoi, state.u_rad, state.u_tan, cfg)
    d_hat = state.d + unc.sigma_rad * rng.standard_normal()
    theta_hat = state.theta + (unc.sigma_tan / state.d) * rng.standard_normal()
    return dataclasses.replace(state, d_hat=d_hat, theta_hat=theta_hat)


def make_fleet(cfg: SimConfig, rng: np.random.Generator) -> list[VehicleState]:
    """Place K vehicles staggered along the road segment with a small random
    offset so Monte-Carlo seeds decorrelate; estimates start exact."""
    span = cfg.road_length * 2.0 / 3.0
    fleet = []
    for k in range(cfg.K):
        x0 = -span / 2.0 + (k + 0.5) * span / cfg.K + rng.uniform(-5.0, 5.0)
        fleet.append(vehicle_from_position(x0, cfg.road_offset, cfg.speed_mean,
                                           d_min=cfg.d_min))
    return fleet
