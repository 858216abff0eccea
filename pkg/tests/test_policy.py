import math

import numpy as np
import pytest

from conftest import build_state, random_state
from misac.channel import steering
from misac.edge import slot_energy, step_queue, validate_action
from misac.policy import (Beamformer, activation_energy, baseline_policy,
                          brute_force_dpp, conjugate_beam, decision_objective,
                          greedy_dpp, project_constant_modulus, radar_only,
                          vision_only)
from misac.scenario import make_config
from misac.sensing import (AoIVector, misalignment_probability, uncertainty,
                           update_aoi)


def test_conjugate_beam_matched_gain():
    for theta in (-0.8, 0.0, 0.31):
        v = conjugate_beam(theta, 64).vector()
        gain = abs(np.vdot(steering(theta, 64), v))
        assert gain == pytest.approx(math.sqrt(64), rel=1e-12)


def test_conjugate_beam_constant_modulus():
    v = conjugate_beam(0.4, 32).vector()
    np.testing.assert_allclose(np.abs(v), 1 / math.sqrt(32), atol=1e-15)


def test_conjugate_beam_halfpower_offset():
    # pointing error of theta_BW / 2 costs about 3 dB (within 1 dB)
    M = 64
    theta_bw = 2.0 / M
    v = conjugate_beam(0.0, M).vector()
    peak = abs(np.vdot(steering(0.0, M), v)) ** 2
    off = abs(np.vdot(steering(theta_bw / 2, M), v)) ** 2
    drop_db = 10 * math.log10(peak / off)
    assert drop_db == pytest.approx(3.0, abs=1.0)


def test_project_constant_modulus_fixed_point():
    phases = np.array([0.0, 1.0, -2.0])
    raw = np.exp(1j * phases) / math.sqrt(3)
    out = project_constant_modulus(raw)
    np.testing.assert_allclose(np.angle(np.exp(1j * (out.phases - phases))),
                               0.0, atol=1e-12)


def test_project_constant_modulus_arguments():
    out = project_constant_modulus(np.array([2.0 + 0j, 2j]))
    np.testing.assert_allclose(out.phases, [0.0, math.pi / 2], atol=1e-12)


def test_project_zero_entry_maps_to_phase_zero():
    out = project_constant_modulus(np.array([0.0 + 0j, 1j]))
    assert out.phases[0] == 0.0


def test_projection_is_euclidean_nearest(rng):
    M = 8
    for _ in range(100):
        raw = rng.normal(size=M) + 1j * rng.normal(size=M)
        proj = project_constant_modulus(raw).vector()
        w = np.exp(1j * rng.uniform(-math.pi, math.pi, M)) / math.sqrt(M)
        assert (np.linalg.norm(raw - proj)
                <= np.linalg.norm(raw - w) + 1e-12)


def test_vision_only_full_allocation():
    cfg = make_config()
    state = build_state(cfg)
    dec = vision_only(state, cfg)
    assert dec.action.pi == (1,) * cfg.K
    assert float(np.sum(dec.action.f)) <= cfg.F_max
    assert float(np.sum(dec.action.f)) == pytest.approx(cfg.F_max, rel=1e-12)
    validate_action(dec.action, cfg)


def test_vision_only_backlog_diverges_under_overload():
    # arrival C/tau above the per-vehicle service rate F/K
    cfg = make_config(C_k=5e6)   # 5e6 > (1e10/4) * 1e-3
    state = build_state(cfg)
    dec = vision_only(state, cfg)
    q = state.queues[0]
    series = []
    for _ in range(200):
        q, _, _ = step_queue(q, dec.action.pi[0], dec.action.f[0],
                             cfg.tau, cfg.C_k)
        series.append(q.backlog)
    growth = cfg.C_k - dec.action.f[0] * cfg.tau
    assert growth > 0
    assert series[-1] == pytest.approx(series[99] + 100 * growth, rel=1e-9)


def test_vision_only_energy_floor():
    cfg = make_config()
    state = build_state(cfg)
    dec = vision_only(state, cfg)
    e = slot_energy(dec.action.f, np.zeros(cfg.K), cfg)
    floor = cfg.K * cfg.kappa * (cfg.F_max / cfg.K) ** 3 * cfg.tau
    assert e >= floor * (1 - 1e-12)


def test_radar_only_structure():
    cfg = make_config()
    state = build_state(cfg)
    dec = radar_only(state, cfg)
    assert dec.action.pi == (0,) * cfg.K
    assert np.all(dec.action.f == 0.0)
    assert slot_energy(dec.action.f, np.zeros(cfg.K), cfg) == 0.0
    validate_action(dec.action, cfg)


def test_radar_only_aoi_grows_linearly():
    aoi = AoIVector(1, 3)
    for n in range(1, 50):
        aoi = update_aoi(aoi, task_completed=False)
        assert aoi.a_tan == 3 + n


def test_radar_only_misalignment_drifts_to_one():
    cfg = make_config()
    state = build_state(cfg)
    veh = state.vehicles[0]
    probs = []
    for a_tan in (1, 10, 100, 1000, 10000, 100000):
        unc = uncertainty(AoIVector(1, a_tan), veh.u_rad, veh.u_tan, cfg)
        probs.append(misalignment_probability(unc.sigma_tan, veh.d, cfg.theta_BW))
    assert all(a <= b + 1e-15 for a, b in zip(probs, probs[1:]))
    assert probs[-1] > 0.99


def test_greedy_idle_when_queues_empty_and_deficit_large():
    cfg = make_config()
    state = build_state(cfg, a_tans=[20] * cfg.K, z=1e6)
    dec = greedy_dpp(state, cfg)
    assert dec.action.pi == (0,) * cfg.K
    assert np.all(dec.action.f == 0.0)


def test_greedy_activates_everyone_when_pcrb_dominates():
    cfg = make_config(V=1e12)
    state = build_state(cfg, a_tans=[200] * cfg.K, z=0.0)
    dec = greedy_dpp(state, cfg)
    assert dec.action.pi == (1,) * cfg.K


def test_greedy_refuses_oversized_exhaustive_search():
    cfg = make_config(K=13, greedy_k_cutoff=12)
    state = build_state(cfg)
    with pytest.raises(ValueError, match="cutoff"):
        greedy_dpp(state, cfg)


def test_greedy_matches_brute_force_oracle(rng):
    # two-stage search vs joint enumeration, K = 2 and 3 CPU levels
    cfg = make_config(K=2, cpu_levels=3)
    for _ in range(200):
        state = random_state(cfg, rng)
        g = greedy_dpp(state, cfg)
        b = brute_force_dpp(state, cfg)
        assert g.action.pi == b.action.pi
        np.testing.assert_array_equal(g.action.f, b.action.f)
        assert g.diagnostics["objective"] == pytest.approx(
            b.diagnostics["objective"], abs=1e-9)


def test_every_policy_decision_is_feasible(rng):
    cfg = make_config()
    for _ in range(100):
        state = random_state(cfg, rng)
        for policy in (vision_only, radar_only, greedy_dpp):
            dec = policy(state, cfg)
            validate_action(dec.action, cfg)
            assert float(np.sum(dec.action.f)) <= cfg.F_max + 1e-9
            dev = np.abs(np.abs(dec.action.v) - 1 / math.sqrt(cfg.M))
            assert float(np.max(dev)) < 1e-12


def test_greedy_dominates_baselines_on_decision_objective(rng):
    cfg = make_config()
    for _ in range(500):
        state = random_state(cfg, rng)
        g = greedy_dpp(state, cfg)
        g_val = g.diagnostics["objective"]
        for other in (vision_only(state, cfg), radar_only(state, cfg)):
            other_val = decision_objective(state, other.action.pi,
                                           np.asarray(other.action.f), cfg)
            assert g_val <= other_val + 1e-9


def test_baseline_policy_lookup():
    assert baseline_policy("radar-only") is radar_only
    with pytest.raises(ValueError, match="unknown baseline"):
        baseline_policy("nope")


def test_activation_energy_value():
    cfg = make_config(kappa=1e-24, tau=1e-3, C_k=2e6)
    assert activation_energy(cfg) == pytest.approx(1e-24 * 2e9 ** 2 * 2e6)


def test_beamformer_vector_modulus():
    bf = Beamformer(phases=np.linspace(-3, 3, 16))
    np.testing.assert_allclose(np.abs(bf.vector()), 0.25, atol=1e-15)


def test_greedy_v_zero_never_activates(rng):
    cfg = make_config(V=0.0)
    for _ in range(50):
        state = random_state(cfg, rng)
        dec = greedy_dpp(state, cfg)
        assert dec.action.pi == (0,) * cfg.K


def test_greedy_beam_search_flag_stays_feasible(rng):
    cfg = make_config(K=2, M=16, beam_search=True)
    state = random_state(cfg, rng)
    dec = greedy_dpp(state, cfg)
    validate_action(dec.action, cfg)
