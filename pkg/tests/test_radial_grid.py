import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import nlslab as nl
from nlslab.radial_grid import (
    apply_laplacian3d,
    ddr,
    ddr_spectral,
    dst1,
    dst_eigenstep,
    grad_norm2,
    h1_norm2,
    inner,
    integrate3d,
    l2_norm2,
    pairing,
    scaling_derivative,
    sine_coeffs,
)
from conftest import random_bump_field


def test_grid_properties(grid512):
    g = grid512
    assert g.h == pytest.approx(30.0 / 512)
    assert g.m == 511
    assert g.r[0] == pytest.approx(g.h)
    assert g.r[-1] == pytest.approx(30.0)
    assert len(g.lam) == g.m
    assert g.lam[0] == pytest.approx((np.pi / 30.0) ** 2)


def test_grid_validation():
    with pytest.raises(ValueError, match="too coarse"):
        nl.make_grid(32, 30.0)
    with pytest.raises(ValueError, match="r_max"):
        nl.make_grid(128, -1.0)


def test_field_validation(grid512):
    with pytest.raises(ValueError, match="length"):
        nl.RadialField(grid512, np.zeros(7))
    bad = np.zeros(grid512.n)
    bad[3] = np.nan
    with pytest.raises(ValueError, match="non-finite"):
        nl.RadialField(grid512, bad)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=10**6))
def test_dst1_involution_and_parseval(seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=255)
    y = dst1(x)
    assert np.allclose(dst1(y), x, atol=1e-12)
    assert np.sum(x**2) == pytest.approx(np.sum(y**2), rel=1e-12)


def test_integrate3d_gaussian(grid512):
    # int e^{-r^2} over R^3 = pi^{3/2}
    g = grid512
    val = integrate3d(np.exp(-g.r**2), g)
    assert val == pytest.approx(np.pi**1.5, rel=1e-12)


def test_integrate3d_rejects_nonfinite(grid512):
    f = np.zeros(grid512.n)
    f[0] = np.inf
    with pytest.raises(ValueError, match="non-finite"):
        integrate3d(f, grid512)


def test_inner_pairing_consistency(grid512):
    rng = np.random.default_rng(1)
    u = random_bump_field(rng, grid512)
    w = random_bump_field(rng, grid512)
    assert inner(u, w, grid512) == pytest.approx(
        np.real(pairing(u, w, grid512)), rel=1e-12)
    assert l2_norm2(u, grid512) > 0
    assert h1_norm2(u, grid512) == pytest.approx(
        grad_norm2(u, grid512) + l2_norm2(u, grid512), rel=1e-14)


def test_laplacian_on_sine_eigenfunction(grid512):
    # u_k = sin(k pi r / r_max)/r is an exact discrete eigenfunction
    g = grid512
    for k in (1, 7, 100):
        lam = (k * np.pi / g.r_max) ** 2
        u = np.sin(k * np.pi * g.r / g.r_max) / g.r
        lap = apply_laplacian3d(u, g)
        assert np.max(np.abs(lap + lam * u)) < 1e-9 * lam


def test_grad_norm_matches_derivative(grid512):
    g = grid512
    u = np.exp(-g.r**2)
    direct = integrate3d(np.abs(ddr_spectral(u, g)) ** 2, g)
    assert grad_norm2(u, g) == pytest.approx(direct, rel=1e-10)


def test_ddr_spectral_accuracy(grid512):
    g = grid512
    u = np.exp(-g.r**2)
    exact = -2.0 * g.r * np.exp(-g.r**2)
    assert np.max(np.abs(ddr_spectral(u, g) - exact)) < 1e-9
    # the finite-difference fallback is only O(h^2)
    assert np.max(np.abs(ddr(u, g) - exact)) < 1e-2


def test_scaling_derivative_identity(grid512):
    g = grid512
    u = np.exp(-g.r**2) * (1.0 + 0.5j)
    expect = u + g.r * ddr_spectral(u, g)
    assert np.max(np.abs(scaling_derivative(u, g) - expect)) < 1e-8


def test_dst_eigenstep_unitary_and_composes(grid512):
    g = grid512
    rng = np.random.default_rng(2)
    v = (g.r * random_bump_field(rng, g)).astype(complex)
    v[-1] = 0.0
    w = dst_eigenstep(v, 0.37, g)
    assert np.sum(np.abs(w[: g.m]) ** 2) == pytest.approx(
        np.sum(np.abs(v[: g.m]) ** 2), rel=1e-12)
    w2 = dst_eigenstep(dst_eigenstep(v, 0.2, g), 0.17, g)
    assert np.allclose(w[: g.m], w2[: g.m], atol=1e-12)
    back = dst_eigenstep(w, -0.37, g)
    assert np.allclose(back[: g.m], v[: g.m], atol=1e-12)
    with pytest.raises(ValueError, match="non-finite"):
        dst_eigenstep(v, np.nan, g)


def test_sine_coeffs_roundtrip(grid512):
    g = grid512
    rng = np.random.default_rng(3)
    v = np.real(g.r * random_bump_field(rng, g, complex_amps=False))
    v[-1] = 0.0
    assert np.allclose(dst1(sine_coeffs(g, v)), v[: g.m], atol=1e-12)
