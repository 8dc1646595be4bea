import numpy as np
import pytest

import nlslab as nl
from nlslab.evolution import (
    BLOWUP,
    SCATTER,
    STOP_BLOWUP,
    STOP_TMAX,
    STOP_WALL,
    TRAPPED,
    UNDECIDED,
    FateThresholds,
    Trajectory,
    classify_fate,
    effective_blowup_threshold,
    step,
)
from nlslab.radial_grid import grad_norm2, h1_norm2, l2_norm2
from conftest import random_bump_field


def test_config_validation():
    with pytest.raises(ValueError, match="positive"):
        nl.EvolutionConfig(dt=-1e-3)
    with pytest.raises(ValueError, match="positive"):
        nl.EvolutionConfig(t_max=0.0)


def test_mass_conserved_exactly(grid512):
    rng = np.random.default_rng(0)
    u = random_bump_field(rng, grid512)
    m0 = l2_norm2(u, grid512)
    for _ in range(100):
        u = step(u, 1e-3, grid512)
    assert l2_norm2(u, grid512) == pytest.approx(m0, rel=1e-13)


def test_soliton_short_time_phase(gs512, grid512):
    # e^{-it} Q over a short window, before instability amplifies noise
    u = gs512.Q.astype(complex)
    t = 0.1
    for _ in range(100):
        u = step(u, 1e-3, grid512)
    err = np.sqrt(h1_norm2(u - np.exp(-1j * t) * gs512.Q, grid512))
    assert err < 5e-3


def test_second_order_in_dt(gs512, grid512):
    def err(dt):
        u = gs512.Q.astype(complex)
        for _ in range(round(0.3 / dt)):
            u = step(u, dt, grid512)
        return np.sqrt(h1_norm2(u - np.exp(-0.3j) * gs512.Q, grid512))

    ratio = err(2e-3) / err(1e-3)
    assert 3.0 <= ratio <= 5.0


def test_blowup_threshold_cap(grid512):
    cfg = nl.EvolutionConfig(blowup_gradient_threshold=1e9)
    thr = effective_blowup_threshold(cfg, grid512, u0_l2=1.0, gradQ=7.5)
    assert thr == pytest.approx(0.15 * np.pi / grid512.h)
    cfg2 = nl.EvolutionConfig(blowup_gradient_threshold=5.0)
    assert effective_blowup_threshold(cfg2, grid512, 1.0, 7.5) == 5.0


def test_gaussian_blowup_both_directions(grid512):
    u0 = 5.0 * np.exp(-grid512.r**2) + 0j
    assert nl.evaluate(u0, grid512).energy < 0
    cfg = nl.EvolutionConfig(dt=1e-3, t_max=3.0, sample_every=10)
    fwd = nl.evolve(u0, cfg, grid512)
    bwd = nl.evolve_backward(u0, cfg, grid512)
    assert fwd.stop_reason == STOP_BLOWUP
    assert bwd.stop_reason == STOP_BLOWUP
    assert bwd.stop_time < 0
    assert classify_fate(fwd, FateThresholds(window=0.2)) == BLOWUP
    assert classify_fate(bwd, FateThresholds(window=0.2)) == BLOWUP


def test_backward_of_real_data_mirrors_forward(grid512):
    # conjugation symmetry: real data evolve identically in both directions
    u0 = 1.5 * np.exp(-grid512.r**2) + 0j
    cfg = nl.EvolutionConfig(dt=1e-3, t_max=0.3, sample_every=10)
    fwd = nl.evolve(u0, cfg, grid512)
    bwd = nl.evolve_backward(u0, cfg, grid512)
    assert np.allclose(bwd.t, -fwd.t)
    assert np.allclose(bwd.diag["K"], fwd.diag["K"], rtol=1e-12)


def test_wall_contamination_stop(grid512):
    # a packet placed near the wall disperses into it quickly
    u0 = 0.5 * np.exp(-((grid512.r - 25.0) ** 2)) + 0j
    u0[-1] = 0.0
    cfg = nl.EvolutionConfig(dt=1e-3, t_max=10.0, sample_every=10)
    traj = nl.evolve(u0, cfg, grid512)
    assert traj.stop_reason == STOP_WALL
    assert traj.stop_time < 10.0


def test_hooks_recorded_and_fail_soft(grid512):
    calls = []

    def good(t, u):
        calls.append(t)
        return float(np.abs(u[0]))

    def bad(t, u):
        raise RuntimeError("boom")

    cfg = nl.EvolutionConfig(dt=1e-3, t_max=0.05, sample_every=10)
    u0 = np.exp(-grid512.r**2) + 0j
    traj = nl.evolve(u0, cfg, grid512, hooks={"g": good, "b": bad})
    assert len(traj.diag["g"]) == len(traj.t)
    assert np.all(np.isnan(traj.diag["b"]))
    assert np.all(np.isfinite(traj.diag["g"]))


def test_snapshots_cadence(grid512):
    cfg = nl.EvolutionConfig(dt=1e-3, t_max=0.1, sample_every=10,
                             snapshot_every=2)
    u0 = np.exp(-grid512.r**2) + 0j
    traj = nl.evolve(u0, cfg, grid512)
    assert len(traj.snapshots) >= 3
    t1, f1 = traj.snapshots[1]
    assert f1.shape == (grid512.n,)


def _synthetic(t, K, dQ=None, core=None, stop=STOP_TMAX):
    n = len(t)
    diag = {"K": np.asarray(K, dtype=float),
            "mass_core": np.asarray(core if core is not None else np.ones(n)),
            }
    if dQ is not None:
        diag["dQ"] = np.asarray(dQ, dtype=float)
    g = nl.make_grid(64, 30.0)
    return Trajectory(grid=g, t=np.asarray(t, dtype=float), diag=diag,
                      snapshots=[], stop_reason=stop, stop_time=float(t[-1]))


def test_classify_fate_trapped_and_undecided():
    t = np.linspace(0, 3, 31)
    tr = _synthetic(t, K=np.ones(31), dQ=np.full(31, 1e-3))
    assert classify_fate(tr, FateThresholds(R_trap=0.05, window=1.0)) == TRAPPED
    # dQ wanders above the trap radius but K and core are not scatter-like
    tr2 = _synthetic(t, K=-np.ones(31), dQ=np.full(31, 1.0))
    assert classify_fate(tr2) == UNDECIDED


def test_classify_fate_scatter():
    t = np.linspace(0, 3, 31)
    tr = _synthetic(t, K=np.ones(31), dQ=np.full(31, 2.0),
                    core=np.linspace(1.0, 0.2, 31))
    assert classify_fate(tr, FateThresholds(window=1.5)) == SCATTER
