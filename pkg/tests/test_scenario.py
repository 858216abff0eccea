import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from misac.scenario import (ConfigError, default_config, load_config,
                            make_config, make_fleet, parse_config_text,
                            step_kinematics, update_estimate,
                            vehicle_from_position)
from misac.sensing import AoIVector


def test_default_config_published_values():
    cfg = default_config()
    assert cfg.M == 64
    assert cfg.K == 4
    assert cfg.f_c == 28e9
    assert cfg.E_budget == 20.0
    assert cfg.P_max_dbm == 30.0
    # 10 dB receive SNR, oracle: decibel conversion
    assert cfg.eta_rx == pytest.approx(10.0 ** (10.0 / 10.0), rel=0, abs=0)


def test_derived_defaults_track_overrides():
    cfg = make_config(M=8, tau=0.01, C_k=3e6, E_budget=5.0)
    assert cfg.theta_BW == pytest.approx(2.0 / 8)
    assert cfg.c_rad == pytest.approx(0.01)
    assert cfg.c_tan == pytest.approx(0.01)
    assert cfg.queue_scale == pytest.approx(3e6)
    assert cfg.energy_scale == pytest.approx(5.0)


def test_config_invariants_enforced():
    with pytest.raises(ConfigError):
        make_config(M=0)
    with pytest.raises(ConfigError):
        make_config(tau=0.0)
    with pytest.raises(ConfigError):
        make_config(theta_BW=4.0)
    with pytest.raises(ConfigError):
        make_config(V=-1.0)
    with pytest.raises(ConfigError):
        make_config(not_a_field=3)


def test_config_file_roundtrip(tmp_path):
    path = tmp_path / "sim.cfg"
    path.write_text("""
# overrides
M = 16
K = 2
eta_rx = 3.5   # linear
sampled_recovery = true
""")
    cfg = load_config(path)
    assert cfg.M == 16 and cfg.K == 2
    assert cfg.eta_rx == 3.5
    assert cfg.sampled_recovery is True
    assert cfg.theta_BW == pytest.approx(2.0 / 16)


def test_config_file_unknown_key_is_error(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("M = 16\nbogus_knob = 1\n")
    with pytest.raises(ConfigError, match="bogus_knob"):
        load_config(path)


def test_config_file_bad_syntax(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("M 16\n")
    with pytest.raises(ConfigError, match="line 1"):
        load_config(path)


def test_parse_types():
    vals = parse_config_text("M = 64\nspeed_mean = 12.5\nrng_seed = 7")
    assert isinstance(vals["M"], int) and isinstance(vals["rng_seed"], int)
    assert isinstance(vals["speed_mean"], float)
    with pytest.raises(ConfigError):
        parse_config_text("M = 64.5")


def _cfg(**kw):
    return make_config(**kw)


def test_zero_velocity_zero_jitter_fixed_point():
    cfg = _cfg(speed_jitter=0.0)
    state = vehicle_from_position(30.0, 20.0, 0.0)
    rng = np.random.default_rng(0)
    nxt = step_kinematics(state, cfg.tau, rng, cfg)
    assert nxt == state


def test_hand_kinematics_translation():
    # (30, 20) m at (-15, 0) m/s over 0.1 s -> (28.5, 20), hand kinematics
    cfg = _cfg(speed_jitter=0.0)
    state = vehicle_from_position(30.0, 20.0, -15.0)
    rng = np.random.default_rng(0)
    nxt = step_kinematics(state, 0.1, rng, cfg)
    assert nxt.x == pytest.approx(28.5, abs=1e-12)
    assert nxt.y == pytest.approx(20.0, abs=1e-12)
    assert nxt.d == pytest.approx(math.hypot(28.5, 20.0), rel=1e-12)


def test_broadside_crossing_polar_frame():
    state = vehicle_from_position(0.0, 20.0, -15.0)
    assert state.theta == pytest.approx(0.0)
    assert abs(state.u_tan) == pytest.approx(15.0, rel=1e-12)
    assert state.u_rad == pytest.approx(0.0, abs=1e-12)


def test_range_clamp_flags():
    state = vehicle_from_position(0.0, 0.2, 10.0, d_min=1.0)
    assert state.range_clamped
    assert state.d == 1.0


def test_kinematics_invariants_along_trajectory():
    cfg = _cfg()
    rng = np.random.default_rng(3)
    state = vehicle_from_position(-40.0, cfg.road_offset, cfg.speed_mean)
    for _ in range(500):
        state = step_kinematics(state, cfg.tau, rng, cfg)
        assert state.d ** 2 == pytest.approx(state.x ** 2 + state.y ** 2, rel=1e-9)
        assert -math.pi / 2 < state.theta < math.pi / 2
    # speed decomposition: u_rad^2 + u_tan^2 equals the squared ground speed
    sp = vehicle_from_position(12.0, 20.0, -17.3)
    assert sp.u_rad ** 2 + sp.u_tan ** 2 == pytest.approx(17.3 ** 2, rel=1e-9)


@given(x=st.floats(-140, 140), vx=st.floats(-30, 30))
def test_polar_speed_decomposition_property(x, vx):
    s = vehicle_from_position(x, 20.0, vx)
    assert s.u_rad ** 2 + s.u_tan ** 2 == pytest.approx(vx ** 2, rel=1e-9, abs=1e-12)


def test_road_wrap():
    cfg = _cfg(speed_jitter=0.0, road_length=100.0)
    state = vehicle_from_position(49.9, 20.0, 15.0)
    nxt = step_kinematics(state, 0.1, np.random.default_rng(0), cfg)
    assert nxt.x == pytest.approx(49.9 + 1.5 - 100.0)


def test_same_seed_bit_identical_trajectories():
    cfg = _cfg()
    runs = []
    for _ in range(2):
        rng = np.random.default_rng(cfg.rng_seed)
        state = make_fleet(cfg, rng)[0]
        xs = []
        for _ in range(200):
            state = step_kinematics(state, cfg.tau, rng, cfg)
            xs.append((state.x, state.u_tan))
        runs.append(xs)
    assert runs[0] == runs[1]


def test_update_estimate_noiseless():
    cfg = _cfg(eps_rad=0.0, eps_cam=0.0, c_rad=0.0, c_tan=0.0)
    state = vehicle_from_position(30.0, 20.0, 15.0)
    est = update_estimate(state, AoIVector(1, 5), np.random.default_rng(0), cfg)
    assert est.d_hat == state.d
    assert est.theta_hat == state.theta


def test_update_estimate_angular_std_matches_sigma_over_d():
    # sigma_tan = 3 m at d = 30 m -> angular std 0.1 rad, Monte Carlo oracle
    cfg = _cfg(eps_rad=0.0, eps_cam=3.0, c_rad=0.0, c_tan=0.0)
    state = vehicle_from_position(0.0, 30.0, 15.0)
    rng = np.random.default_rng(11)
    draws = np.array([
        update_estimate(state, AoIVector(1, 1), rng, cfg).theta_hat - state.theta
        for _ in range(100_000)
    ])
    assert np.std(draws) == pytest.approx(0.1, rel=0.02)


def test_update_estimate_scales_with_tangential_aoi():
    # with the floor negligible, doubling a_tan doubles the angular error std
    cfg = _cfg(eps_rad=0.0, eps_cam=1e-9, c_tan=1e-3, c_rad=0.0)
    state = vehicle_from_position(0.0, 30.0, 15.0)

    def angular_std(a_tan, seed):
        rng = np.random.default_rng(seed)
        d = [update_estimate(state, AoIVector(1, a_tan), rng, cfg).theta_hat
             - state.theta for _ in range(100_000)]
        return np.std(d)

    s1 = angular_std(10, 5)
    s2 = angular_std(20, 6)
    assert s2 / s1 == pytest.approx(2.0, rel=0.03)


def test_update_estimate_requires_valid_aoi():
    cfg = _cfg()
    state = vehicle_from_position(30.0, 20.0, 15.0)
    bad = dataclasses.replace(AoIVector(1, 1))
    object.__setattr__(bad, "a_tan", 0)
    with pytest.raises(ValueError):
        update_estimate(state, bad, np.random.default_rng(0), cfg)


def test_make_fleet_layout():
    cfg = _cfg(K=4)
    fleet = make_fleet(cfg, np.random.default_rng(0))
    assert len(fleet) == 4
    assert all(v.y == cfg.road_offset for v in fleet)
    xs = [v.x for v in fleet]
    assert xs == sorted(xs)
