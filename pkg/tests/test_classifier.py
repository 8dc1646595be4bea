import numpy as np
import pytest

import nlslab as nl
from nlslab.classifier import (
    DataFamily,
    _trap_horizon,
    make_initial_data,
    make_modulation_hooks,
    run_direction,
)
from nlslab.evolution import BLOWUP, SCATTER
from nlslab.ground_state import mass
from nlslab.functionals import evaluate


def test_initial_data_mass_exact(sd512, gs512):
    for fam in [DataFamily(a=0.05, b=0.05), DataFamily(a=-0.02, b=0.07),
                DataFamily(a=0.03, phase=1.1)]:
        u0 = make_initial_data(fam, sd512, gs512)
        M = 0.5 * nl.radial_grid.l2_norm2(u0, gs512.grid)
        assert M == pytest.approx(mass(gs512), rel=1e-12)


def test_initial_data_amplitude_guard(sd512, gs512):
    with pytest.raises(ValueError, match="resolved regime"):
        make_initial_data(DataFamily(a=0.5), sd512, gs512)


def test_zero_seed_is_soliton(sd512, gs512):
    u0 = make_initial_data(DataFamily(), sd512, gs512)
    assert np.allclose(u0, gs512.Q)


def test_conjugation_swaps_coefficients(sd512, gs512):
    fam = DataFamily(a=0.04, b=-0.01)
    swapped = DataFamily(a=-0.01, b=0.04)
    u = make_initial_data(fam, sd512, gs512)
    v = make_initial_data(swapped, sd512, gs512)
    assert np.allclose(np.conj(u), v, atol=1e-12)


def test_seed_action_ordering(sd512, gs512, consts512):
    # same-sign seeds sit below the soliton action (admissible), the
    # sinh-type seeds above it
    JQ = evaluate(gs512.Q, gs512.grid).action
    u_adm = make_initial_data(DataFamily.cosh_seed(0.05, +1), sd512, gs512)
    u_not = make_initial_data(DataFamily.sinh_seed(0.05, 1.0), sd512, gs512)
    assert evaluate(u_adm, gs512.grid).action < JQ
    assert evaluate(u_not, gs512.grid).action > JQ


def test_cosh_seed_fates(sd512, gs512, consts512):
    cfg = nl.EvolutionConfig(dt=1e-3, t_max=3.0, sample_every=10,
                             scatter_window=1.5)
    u_plus = make_initial_data(DataFamily.cosh_seed(0.05, +1), sd512, gs512)
    fate, traj = run_direction(u_plus, sd512, gs512, consts512, cfg)
    assert fate == BLOWUP
    u_minus = make_initial_data(DataFamily.cosh_seed(0.05, -1), sd512, gs512)
    fate, _ = run_direction(u_minus, sd512, gs512, consts512, cfg)
    assert fate == SCATTER


def test_modulation_hooks_track_growth(sd512, gs512, consts512):
    u0 = make_initial_data(DataFamily(a=0.001, b=0.001), sd512, gs512)
    hooks = make_modulation_hooks(sd512, gs512, consts512)
    cfg = nl.EvolutionConfig(dt=1e-3, t_max=0.5, sample_every=10)
    traj = nl.evolve(u0, cfg, gs512.grid, hooks=hooks)
    lp = traj.diag["lambda_plus"]
    assert lp[0] == pytest.approx(0.001, abs=1e-5)
    # the Gp coefficient grows like e^{mu t}
    growth = lp[-1] / lp[0]
    expect = np.exp(sd512.mu * traj.t[-1])
    assert growth == pytest.approx(expect, rel=0.1)
    # the Gm coefficient does not grow comparably
    assert abs(traj.diag["lambda_minus"][-1]) < 0.2 * abs(lp[-1])


def test_trap_horizon_below_dwell(consts512, sd512):
    horizon = _trap_horizon(consts512, sd512)
    dwell = np.log(consts512.delta_X / 1e-10) / sd512.mu
    assert horizon < dwell
    assert horizon > 1.5


def test_one_pass_small_batch(sd512, gs512, consts512):
    rep = nl.one_pass_check(sd512, gs512, consts512, n_traj=6, seed=11)
    assert rep.n_exiting >= 5
    assert rep.violations == 0
    assert rep.sign_flips == 0


def test_one_pass_radius_guard(sd512, gs512, consts512):
    with pytest.raises(ValueError, match="band"):
        nl.one_pass_check(sd512, gs512, consts512, R=10.0)
