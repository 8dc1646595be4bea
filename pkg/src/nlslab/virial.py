# virial.py
#
# Saturated virial monitors:  V(u) = <phi_m u | i u_r>  with the exact
# time-derivative identities in two weight variants.
#
# Blow-up variant: phi = r on r <= 1, 3/2 on r >= 2, C-infinity in between
# with 0 <= phi' <= 1 and phi'' <= 0 (quintic smoothstep on phi', so that
# phi''' stays continuous).  Scaled weight phi_m(r) = m*phi(r/m).
#   dV/dt = 2K(u) - 2 int |u_r|^2 f0(r/m) dx
#           + int |u|^2 f1(r/m)/r^2 dx + int |u|^4 f2(r/m) dx
# with f0 = 1 - phi', f1 = -r^2 phi'''/2 - 2 r phi'', f2 = 3/2 - phi'/2 - phi/r.
#
# Scatter variant: phi = r/(1+r), chi = 1/(1+r) (so chi^2 = phi').
#   dV/dt = 2K(chi_m u) + int |u|^2 m^{-2} f3(r/m) dx + int |u|^4 f4(r/m) dx
# with f3 = (1+r)^{-4}, f4 = -r(2r^2 + 7r + 8) / (2 (1+r)^4) <= 0.

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .functionals import evaluate
from .radial_grid import RadialGrid, ddr_spectral, integrate3d

BLOWUP_VARIANT = "blowup"
SCATTER_VARIANT = "scatter"


def _smoothstep(x: np.ndarray) -> np.ndarray:
    """Quintic smoothstep: 0 -> 1 on [0,1] with two flat derivatives."""
    x = np.clip(x, 0.0, 1.0)
    return x**3 * (6.0 * x**2 - 15.0 * x + 10.0)


def _blowup_profile(s: np.ndarray):
    """phi, phi', phi'', phi''' of the unscaled blow-up weight."""
    s = np.asarray(s, dtype=float)
    x = np.clip(s - 1.0, 0.0, 1.0)
    S = _smoothstep(x)
    dS = 30.0 * x**2 * (x - 1.0) ** 2
    d2S = 60.0 * x * (2.0 * x - 1.0) * (x - 1.0)
    inside = s <= 1.0
    outside = s >= 2.0
    phip = np.where(inside, 1.0, np.where(outside, 0.0, 1.0 - S))
    phipp = np.where(inside | outside, 0.0, -dS)
    phippp = np.where(inside | outside, 0.0, -d2S)
    # phi itself: r below 1, then 1 + int_1^s (1 - S); the quintic
    # integrates to x - (x^6 - 3x^5 + 2.5x^4) ... do it in closed form
    intS = x**6 - 3.0 * x**5 + 2.5 * x**4
    phi = np.where(inside, s, np.where(outside, 1.5, 1.0 + x - intS))
    return phi, phip, phipp, phippp


@dataclass(frozen=True)
class VirialWeight:
    variant: str
    m: float
    grid: RadialGrid
    phi_m: np.ndarray          # m * phi(r/m)
    dphi_m: np.ndarray         # phi'(r/m)
    # blow-up variant weights (None for scatter)
    f0: np.ndarray | None = None
    f1: np.ndarray | None = None
    f2: np.ndarray | None = None
    # scatter variant weights (None for blow-up)
    chi_m: np.ndarray | None = None
    f3: np.ndarray | None = None
    f4: np.ndarray | None = None


def make_blowup_weight(grid: RadialGrid, m: float) -> VirialWeight:
    s = grid.r / m
    phi, phip, phipp, phippp = _blowup_profile(s)
    f0 = 1.0 - phip
    f1 = -(s**2) * phippp / 2.0 - 2.0 * s * phipp
    f2 = 1.5 - phip / 2.0 - phi / s
    return VirialWeight(variant=BLOWUP_VARIANT, m=m, grid=grid,
                        phi_m=m * phi, dphi_m=phip, f0=f0, f1=f1, f2=f2)


def make_scatter_weight(grid: RadialGrid, m: float) -> VirialWeight:
    s = grid.r / m
    phi = s / (1.0 + s)
    phip = 1.0 / (1.0 + s) ** 2
    f3 = 1.0 / (1.0 + s) ** 4
    f4 = -s * (2.0 * s**2 + 7.0 * s + 8.0) / (2.0 * (1.0 + s) ** 4)
    return VirialWeight(variant=SCATTER_VARIANT, m=m, grid=grid,
                        phi_m=m * phi, dphi_m=phip,
                        chi_m=1.0 / (1.0 + s), f3=f3, f4=f4)


def make_weight(variant: str, grid: RadialGrid, m: float) -> VirialWeight:
    if variant == BLOWUP_VARIANT:
        return make_blowup_weight(grid, m)
    if variant == SCATTER_VARIANT:
        return make_scatter_weight(grid, m)
    raise ValueError(f"unknown virial variant {variant!r}")


def virial_value(u: np.ndarray, w: VirialWeight) -> float:
    """
    V(u) = Re int phi_m u conj(i u_r) 4 pi r^2 dr
         = int phi_m Im(u conj(u_r)) 4 pi r^2 dr,
    with the spectral radial derivative.  Vanishes identically on real
    fields and on constant-phase rotations of real profiles.
    """
    u = np.asarray(u, dtype=complex)
    ur = ddr_spectral(u, w.grid)
    integrand = w.phi_m * np.imag(u * np.conj(ur))
    return float(integrate3d(integrand, w.grid))


def virial_rhs(u: np.ndarray, w: VirialWeight) -> float:
    """Exact right-hand side of the saturated virial identity."""
    u = np.asarray(u, dtype=complex)
    grid = w.grid
    if w.variant == BLOWUP_VARIANT:
        K = evaluate(u, grid).K
        ur = ddr_spectral(u, grid)
        t0 = -2.0 * float(integrate3d(np.abs(ur) ** 2 * w.f0, grid))
        t1 = float(integrate3d(np.abs(u) ** 2 * w.f1 / grid.r**2, grid))
        t2 = float(integrate3d(np.abs(u) ** 4 * w.f2, grid))
        return 2.0 * K + t0 + t1 + t2
    K = evaluate(w.chi_m * u, grid).K
    t3 = float(integrate3d(np.abs(u) ** 2 * w.f3, grid)) / w.m**2
    t4 = float(integrate3d(np.abs(u) ** 4 * w.f4, grid))
    return 2.0 * K + t3 + t4


def verify_identity(traj, w: VirialWeight) -> float:
    """
    Max residual of  dV/dt = RHS  along a trajectory's field snapshots,
    with a central-difference time derivative.  Residuals are measured
    relative to max(1, sup|RHS|).

    Requires at least 3 snapshots (evolve with snapshot_every > 0).
    """
    snaps = traj.snapshots
    if len(snaps) < 3:
        raise ValueError("need at least 3 field snapshots")
    ts = np.array([t for t, _ in snaps])
    vals = np.array([virial_value(f, w) for _, f in snaps])
    rhs = np.array([virial_rhs(f, w) for _, f in snaps])
    dvdt = (vals[2:] - vals[:-2]) / (ts[2:] - ts[:-2])
    scale = max(1.0, float(np.max(np.abs(rhs))))
    return float(np.max(np.abs(dvdt - rhs[1:-1]))) / scale
