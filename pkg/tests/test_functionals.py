import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import nlslab as nl
from nlslab.functionals import (
    alpha_metric,
    c_superquadratic,
    evaluate,
    gn_ratio,
    verify_radial_sobolev,
)
from conftest import random_bump_field


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=0, max_value=10**6))
def test_algebraic_identities(seed):
    g = nl.make_grid(256, 30.0)
    u = random_bump_field(np.random.default_rng(seed), g)
    rep = evaluate(u, g)
    assert rep.action == pytest.approx(rep.energy + rep.mass, rel=1e-12)
    assert rep.G == pytest.approx(rep.action - rep.K / 3.0, rel=1e-9, abs=1e-12)
    assert rep.I == pytest.approx(rep.action - rep.K / 2.0, rel=1e-9, abs=1e-12)
    assert rep.K == pytest.approx(rep.grad2 - 0.75 * rep.l4_4, rel=1e-12)


def test_evaluate_rejects_nonfinite(grid512):
    u = np.zeros(grid512.n)
    u[0] = np.nan
    with pytest.raises(ValueError, match="non-finite"):
        evaluate(u, grid512)


def test_gaussian_values(grid512):
    # closed forms for A*exp(-r^2): ||u||_2^2 = A^2 (pi/2)^{3/2},
    # ||grad u||^2 = 3 A^2 (pi/2)^{3/2}, ||u||_4^4 = A^4 (pi/4)^{3/2}
    g = grid512
    A = 1.7
    rep = evaluate(A * np.exp(-g.r**2), g)
    assert 2 * rep.mass == pytest.approx(A**2 * (np.pi / 2) ** 1.5, rel=1e-10)
    assert rep.grad2 == pytest.approx(3 * A**2 * (np.pi / 2) ** 1.5, rel=1e-10)
    assert rep.l4_4 == pytest.approx(A**4 * (np.pi / 4) ** 1.5, rel=1e-10)


def test_alpha_metric(grid512):
    u = np.exp(-grid512.r**2)
    rep = evaluate(u, grid512)
    assert alpha_metric(u, grid512, 1.0) == pytest.approx(
        rep.grad2 + 2 * rep.mass, rel=1e-12)
    with pytest.raises(ValueError, match="positive"):
        alpha_metric(u, grid512, 0.0)


def test_c_superquadratic_scaling(grid512, gs512):
    # C(s*w) = s^3 * cubic + s^4 * quartic
    rng = np.random.default_rng(5)
    w = random_bump_field(rng, grid512)
    c1 = c_superquadratic(w, gs512.Q, grid512)
    c2 = c_superquadratic(2.0 * w, gs512.Q, grid512)
    c_half = c_superquadratic(0.5 * w, gs512.Q, grid512)
    # solve for the two homogeneous components and cross-check
    cubic = (c2 - 16.0 * c1 + (c2 - 8 * c1) * 0) / (8.0 - 16.0)
    quartic = c1 - cubic
    assert c_half == pytest.approx(cubic / 8.0 + quartic / 16.0, rel=1e-9)


def test_gn_ratio_scale_invariant(grid512):
    # numerator and denominator are both quartic in the amplitude, so the
    # ratio is invariant under constant multiplication
    u = np.exp(-grid512.r**2)
    assert gn_ratio(2 * u, grid512) == pytest.approx(
        gn_ratio(u, grid512), rel=1e-12)
    assert gn_ratio(np.zeros(grid512.n), grid512) == 0.0


def test_sobolev_slacks_nonnegative(grid512):
    rng = np.random.default_rng(6)
    for _ in range(20):
        u = random_bump_field(rng, grid512)
        for R in (0.0, 0.5, 1.0, 5.0):
            out = verify_radial_sobolev(u, R, grid512)
            for name, (lhs, rhs, slack) in out.items():
                assert slack >= -1e-10 * rhs, (name, R)
    assert "l4_r2" not in verify_radial_sobolev(u, 0.0, grid512)
    assert "l4_r2" in verify_radial_sobolev(u, 1.0, grid512)


def test_sobolev_empty_region(grid512):
    u = np.exp(-grid512.r**2)
    with pytest.raises(ValueError, match="empty exterior"):
        verify_radial_sobolev(u, 30.0, grid512)
