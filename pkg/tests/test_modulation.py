import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import nlslab as nl
from nlslab.modulation import (
    ModulationConstants,
    chi_cutoff,
    choose_parameters,
    decompose,
    distance_dQ,
    energy_norm,
    fit_ejection,
    sign_S,
)
from nlslab.evolution import Trajectory, STOP_TMAX


def test_constants_hierarchy():
    c = ModulationConstants.from_delta_E(0.1)
    assert c.delta_X == 0.05
    assert c.delta_S == 0.0125
    assert c.R_star == 0.00125
    assert c.eps_star == 0.000125
    assert c.eps0 == 0.1
    assert c.R_star >= 4 * c.eps_star and c.delta_S >= 4 * c.R_star


def test_calibrate_deterministic(sd512, gs512, consts512):
    again = nl.calibrate_constants(sd512, gs512, seed=0)
    assert again == consts512


def test_decompose_recovers_mode_coordinates(sd512, gs512, consts512):
    fam = nl.DataFamily(a=0.003, b=-0.001, phase=0.7)
    u0 = nl.make_initial_data(fam, sd512, gs512)
    st_ = decompose(u0, sd512, gs512)
    assert st_.alpha == pytest.approx(1.0, abs=1e-10)
    assert st_.theta == pytest.approx(0.7, abs=1e-6)
    assert st_.lambda_plus == pytest.approx(0.003, abs=1e-8)
    assert st_.lambda_minus == pytest.approx(-0.001, abs=1e-8)
    assert st_.lambda1 == pytest.approx(0.001, abs=1e-8)
    assert st_.lambda2 == pytest.approx(0.002, abs=1e-8)


def test_decompose_rejects_mass_mismatch(sd512, gs512):
    with pytest.raises(ValueError, match="mass"):
        decompose(1.01 * gs512.Q.astype(complex), sd512, gs512)


def test_phase_undefined_far_from_circle(gs512):
    with pytest.raises(ValueError, match="phase undefined"):
        choose_parameters(np.zeros(gs512.grid.n, dtype=complex), gs512)


def test_energy_norm_on_modes(sd512, gs512):
    # ||a*Gp + b*Gm||_E^2 = mu*(lam1^2 + lam2^2) for pure mode content
    a, b = 0.004, 0.002
    w = a * sd512.g_plus + b * sd512.g_minus
    lam1, lam2 = 0.5 * (a + b), 0.5 * (a - b)
    expect = np.sqrt(sd512.mu * (lam1**2 + lam2**2))
    assert energy_norm(w, sd512, gs512) == pytest.approx(expect, rel=1e-6)


@settings(max_examples=40, deadline=None)
@given(st.floats(min_value=0.0, max_value=5.0))
def test_chi_cutoff_shape(x):
    v = chi_cutoff(x)
    assert 0.0 <= v <= 1.0
    if x <= 1.0:
        assert v == 1.0
    if x >= 2.0:
        assert v == 0.0
    assert chi_cutoff(x) >= chi_cutoff(min(x + 0.1, 5.0))


def test_distance_comparable_to_energy_norm(sd512, gs512, consts512):
    fam = nl.DataFamily(a=0.004, b=0.001)
    u0 = nl.make_initial_data(fam, sd512, gs512)
    st_ = decompose(u0, sd512, gs512)
    dq = distance_dQ(st_, consts512.delta_E)
    assert dq <= consts512.delta_E
    assert 0.5 * st_.linE_norm**2 <= dq**2 <= 2.0 * st_.linE_norm**2


def test_sign_near_circle(sd512, gs512, consts512):
    # admissible seeds need |lambda_2| < |lambda_1|
    for a, b, want in [(0.004, 0.002, -1), (-0.004, -0.002, +1)]:
        u0 = nl.make_initial_data(nl.DataFamily(a=a, b=b), sd512, gs512)
        st_ = decompose(u0, sd512, gs512)
        assert sign_S(st_, u0, consts512.delta_S, consts512, gs512) == want


def test_sign_none_outside_admissible_region(sd512, gs512, consts512):
    # |lambda_2| > |lambda_1| raises the action above the admissible cap
    u0 = nl.make_initial_data(nl.DataFamily(a=0.003, b=-0.001), sd512, gs512)
    st_ = decompose(u0, sd512, gs512)
    assert sign_S(st_, u0, consts512.delta_S, consts512, gs512) is None


def _flat_traj():
    t = np.linspace(0, 2, 41)
    diag = {"dQ": np.full(41, 1e-4), "K": np.zeros(41),
            "lambda_plus": np.zeros(41), "lambda_minus": np.zeros(41)}
    return Trajectory(grid=nl.make_grid(64, 30.0), t=t, diag=diag,
                      snapshots=[], stop_reason=STOP_TMAX, stop_time=2.0)


def test_fit_ejection_requires_band_crossing():
    with pytest.raises(ValueError, match="no ejection"):
        fit_ejection(_flat_traj(), R=0.01, delta_X=0.3)


def test_fit_ejection_on_synthetic_exponential(sd512):
    mu = sd512.mu
    t = np.linspace(0, 1.5, 301)
    dq = 1e-3 * np.exp(mu * t)
    diag = {"dQ": dq, "K": np.full(301, -1.0),
            "lambda_plus": np.full(301, 1e-3),
            "lambda_minus": np.zeros(301)}
    tr = Trajectory(grid=nl.make_grid(64, 30.0), t=t, diag=diag,
                    snapshots=[], stop_reason=STOP_TMAX, stop_time=1.5)
    fit = fit_ejection(tr, R=0.01, delta_X=0.3)
    assert fit.mu_hat == pytest.approx(mu, rel=1e-6)
    assert fit.s_sign == -1
    assert fit.sign_match
