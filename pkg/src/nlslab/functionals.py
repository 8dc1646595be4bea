# functionals.py
#
# Conserved and variational functionals of the focusing cubic NLS, the
# scaled H^1 metric, the superquadratic remainder C(w), and exterior
# radial Sobolev inequality verifiers.
#
# All functionals carry the 4*pi*r^2 volume weight:
#   M = 1/2 ||u||_2^2
#   E = 1/2 ||grad u||_2^2 - 1/4 ||u||_4^4
#   J = E + M
#   K = ||grad u||_2^2 - 3/4 ||u||_4^4        (virial functional)
#   G = 1/6 ||grad u||_2^2 + 1/2 ||u||_2^2    (= J - K/3)
#   I = 1/2 ||u||_2^2 + 1/8 ||u||_4^4         (= J - K/2)

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .radial_grid import (
    RadialGrid,
    grad_norm2,
    inner,
    integrate3d,
    l2_norm2,
)


@dataclass(frozen=True)
class FunctionalReport:
    mass: float
    energy: float
    action: float
    K: float
    G: float
    I: float
    grad2: float
    l4_4: float


def evaluate(u: np.ndarray, grid: RadialGrid) -> FunctionalReport:
    """
    Evaluate all functionals of a field at once.

    Raises on non-finite input; the returned report satisfies J = E + M,
    G = J - K/3 and I = J - K/2 as exact algebraic identities of the
    implementation (same quadrature sums throughout).
    """
    u = np.asarray(u)
    if not np.all(np.isfinite(u)):
        raise ValueError("non-finite field")
    l2_2 = l2_norm2(u, grid)
    g2 = grad_norm2(u, grid)
    l4_4 = float(integrate3d(np.abs(u) ** 4, grid))
    mass = 0.5 * l2_2
    energy = 0.5 * g2 - 0.25 * l4_4
    return FunctionalReport(
        mass=mass,
        energy=energy,
        action=energy + mass,
        K=g2 - 0.75 * l4_4,
        G=g2 / 6.0 + 0.5 * l2_2,
        I=0.5 * l2_2 + 0.125 * l4_4,
        grad2=g2,
        l4_4=l4_4,
    )


def alpha_metric(u: np.ndarray, grid: RadialGrid, alpha: float) -> float:
    """Scaled H^1 metric ||u||_{H^1_alpha}^2 = ||grad u||^2/alpha + alpha*||u||^2."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return grad_norm2(u, grid) / alpha + alpha * l2_norm2(u, grid)


def c_superquadratic(w: np.ndarray, Q: np.ndarray, grid: RadialGrid) -> float:
    """
    Superquadratic part of the action expansion around Q:
    C(w) = <|w|^2 w | Q> + ||w||_4^4 / 4, with <f|g> = Re integral f*conj(g).
    """
    w = np.asarray(w)
    cubic = inner(np.abs(w) ** 2 * w, Q, grid)
    quartic = float(integrate3d(np.abs(w) ** 4, grid))
    return cubic + 0.25 * quartic


def gn_ratio(u: np.ndarray, grid: RadialGrid) -> float:
    """Gagliardo-Nirenberg ratio ||u||_4^4 / (||grad u||^3 ||u||_2)."""
    g = np.sqrt(grad_norm2(u, grid))
    l2 = np.sqrt(l2_norm2(u, grid))
    l4_4 = float(integrate3d(np.abs(u) ** 4, grid))
    denom = g**3 * l2
    return l4_4 / denom if denom > 0 else 0.0


# ---- exterior radial Sobolev inequalities ----

def verify_radial_sobolev(u: np.ndarray, R: float, grid: RadialGrid) -> dict:
    """
    Evaluate both sides of the three exterior radial estimates on (R, inf):

      sup_{r>R} |u|         <= 2 * ||u_r||^{3/4} * ||r u||^{1/4}
      int |u|^4 r dr        <= 4*sqrt(2) * int |u_r|^2 dr * int |u|^2 r^2 dr
      int |u|^4 r^2 dr      <= (2/R^2) * ||r u_r|| * ||r u||^3

    Norms are L^2(R, inf) with the plain dr measure.  Returns a dict of
    {name: (lhs, rhs, slack)} with slack = rhs - lhs; all slacks must be
    nonnegative up to roundoff for any admissible field.
    """
    u = np.asarray(u)
    if R >= grid.r_max:
        raise ValueError("empty exterior region")
    r = grid.r
    h = grid.h
    # spectral derivative of r*u gives clean u_r = ((ru)' - u)/r
    from .radial_grid import ddr_spectral

    ur = ddr_spectral(u, grid)
    mask = r > R
    rm, um, urm = r[mask], u[mask], ur[mask]

    def line(f):
        return float(h * np.sum(f))

    sup_u = float(np.max(np.abs(um))) if mask.any() else 0.0
    n_ur = np.sqrt(line(np.abs(urm) ** 2))
    n_ru = np.sqrt(line(rm**2 * np.abs(um) ** 2))
    n_rur = np.sqrt(line(rm**2 * np.abs(urm) ** 2))

    out = {}
    lhs = sup_u
    rhs = 2.0 * n_ur**0.75 * n_ru**0.25
    out["sup"] = (lhs, rhs, rhs - lhs)

    lhs = line(np.abs(um) ** 4 * rm)
    rhs = 4.0 * np.sqrt(2.0) * line(np.abs(urm) ** 2) * line(rm**2 * np.abs(um) ** 2)
    out["l4_r"] = (lhs, rhs, rhs - lhs)

    if R > 0:
        lhs = line(np.abs(um) ** 4 * rm**2)
        rhs = 2.0 / R**2 * n_rur * n_ru**3
        out["l4_r2"] = (lhs, rhs, rhs - lhs)
    return out
