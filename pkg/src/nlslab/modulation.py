# modulation.py
#
# Decomposition of a field near the soliton circle:
#   u = e^{i theta} (Q + w),   w = lambda_plus*Gp + lambda_minus*Gm + gamma,
# with the explicit parameter choice alpha = M(Q)/M(u),
# theta = Im log (u | -Q'_alpha), the linearized energy norm ||w||_E,
# the smooth distance function d_Q, the sign function S, and the
# ejection-rate fit d_Q(t) ~ e^{mu t}.
#
# Here Gp = phi - i psi and Gm = phi + i psi are the unstable/stable modes
# and gamma is the symplectically orthogonal remainder.

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import cache
from .functionals import c_superquadratic, evaluate
from .ground_state import GroundState, mass, q_prime, scale
from .radial_grid import RadialGrid, inner, pairing
from .spectral import SpectralData, _apply_schroedinger

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ModulationConstants:
    delta_E: float
    delta_X: float
    delta_S: float
    R_star: float
    eps_star: float
    eps0: float

    @classmethod
    def from_delta_E(cls, delta_E: float) -> "ModulationConstants":
        dX = delta_E / 2.0
        dS = dX / 4.0
        Rs = dS / 10.0
        return cls(delta_E=delta_E, delta_X=dX, delta_S=dS,
                   R_star=Rs, eps_star=Rs / 10.0, eps0=delta_E)


@dataclass
class ModulationState:
    alpha: float
    theta: float
    lambda_plus: float
    lambda_minus: float
    gamma: np.ndarray
    w: np.ndarray
    linE_norm: float
    C_w: float
    gamma_quad: float            # <L gamma | gamma>
    dQ: float | None = None
    S_sign: int | None = None

    @property
    def lambda1(self) -> float:
        return 0.5 * (self.lambda_plus + self.lambda_minus)

    @property
    def lambda2(self) -> float:
        return 0.5 * (self.lambda_plus - self.lambda_minus)


@dataclass(frozen=True)
class EjectionFit:
    mu_hat: float
    t_window: tuple
    R: float
    s_sign: int
    sign_match: bool             # sign(K) == s once past the band midpoint


def choose_parameters(u: np.ndarray, gs: GroundState,
                      tol: float = 1e-10) -> tuple:
    """
    Explicit modulation parameters: alpha = M(Q)/M(u) and
    theta = Im log (u | -Q'_alpha) with the complex pairing (f|g) = int f*conj(g).
    """
    grid = gs.grid
    mu_ = 0.5 * inner(u, u, grid)
    if mu_ <= 0:
        raise ValueError("phase undefined: too far from soliton family")
    alpha = mass(gs) / mu_
    gsa = gs if abs(alpha - 1.0) < 1e-13 else scale(gs, alpha)
    qp = q_prime(gsa).values
    p = pairing(u, -qp, grid)
    if abs(p) < tol:
        raise ValueError("phase undefined: too far from soliton family")
    return alpha, float(np.angle(p))


def _gamma_quad(g: np.ndarray, Q: np.ndarray, grid: RadialGrid) -> float:
    """<L gamma|gamma> = <L+ Re g|Re g> + <L- Im g|Im g>."""
    gr, gi = np.real(g), np.imag(g)
    lp = _apply_schroedinger(gr, 3.0 * Q**2, grid)
    lm = _apply_schroedinger(gi, Q**2, grid)
    return inner(lp, gr, grid) + inner(lm, gi, grid)


def _coords(w: np.ndarray, sd: SpectralData, gs: GroundState):
    """Symplectic coordinates of a perturbation w around Q."""
    grid = gs.grid
    gp, gm = sd.g_plus, sd.g_minus
    lam_p = inner(1j * w, gm, grid)
    lam_m = -inner(1j * w, gp, grid)
    gamma = w - lam_p * gp - lam_m * gm
    quad = _gamma_quad(gamma, gs.Q, grid)
    lam1 = 0.5 * (lam_p + lam_m)
    lam2 = 0.5 * (lam_p - lam_m)
    linE2 = sd.mu * (lam1**2 + lam2**2) + 0.5 * max(quad, 0.0)
    return lam_p, lam_m, gamma, quad, linE2


def energy_norm(w: np.ndarray, sd: SpectralData, gs: GroundState) -> float:
    """Linearized energy norm ||w||_E (equivalent to H^1 near the circle)."""
    return float(np.sqrt(_coords(w, sd, gs)[4]))


def decompose(u: np.ndarray, sd: SpectralData, gs: GroundState) -> ModulationState:
    """
    Full modulation state of u.  Precondition: M(u) = M(Q) (callers rescale
    by the exact symmetry first); raises on mass mismatch.
    """
    alpha, theta = choose_parameters(u, gs)
    if abs(alpha - 1.0) > 1e-6:
        raise ValueError("mass not normalized to M(Q)")
    w = np.exp(-1j * theta) * np.asarray(u, dtype=complex) - gs.Q
    lam_p, lam_m, gamma, quad, linE2 = _coords(w, sd, gs)
    return ModulationState(
        alpha=alpha, theta=theta,
        lambda_plus=float(lam_p), lambda_minus=float(lam_m),
        gamma=gamma, w=w,
        linE_norm=float(np.sqrt(linE2)),
        C_w=c_superquadratic(w, gs.Q, gs.grid),
        gamma_quad=float(quad),
    )


def chi_cutoff(x: float) -> float:
    """C-infinity cutoff: 1 on [0,1], 0 on [2,inf)."""
    if x <= 1.0:
        return 1.0
    if x >= 2.0:
        return 0.0
    f = lambda s: np.exp(-1.0 / s)
    return f(2.0 - x) / (f(2.0 - x) + f(x - 1.0))


def distance_dQ(state: ModulationState, delta_E: float) -> float:
    """
    Smooth nonlinear distance to the soliton circle:
    d_Q^2 = ||w||_E^2 - chi(||w||_E / (2 delta_E)) * C(w).
    Satisfies ||w||_E^2/2 <= d_Q^2 <= 2||w||_E^2 whenever d_Q <= delta_E.
    """
    chi = chi_cutoff(state.linE_norm / (2.0 * delta_E))
    dq2 = state.linE_norm**2 - chi * state.C_w
    dq = float(np.sqrt(max(dq2, 0.0)))
    state.dQ = dq
    return dq


def sign_S(state: ModulationState, u: np.ndarray, delta: float,
           consts: ModulationConstants, gs: GroundState,
           J_Q: float | None = None) -> int | None:
    """
    Fate sign: -sign(lambda1) near the circle (d_Q <= delta_E), sign(K)
    away from it (d_Q >= delta).  Requires the admissible energy region
    J(u) < J(Q) + min(d_Q^2/2, eps0^2); returns None outside it.
    """
    grid = gs.grid
    if J_Q is None:
        J_Q = evaluate(gs.Q, grid).action
    rep = evaluate(u, grid)
    dq = state.dQ if state.dQ is not None else distance_dQ(state, consts.delta_E)
    if not rep.action < J_Q + min(0.5 * dq**2, consts.eps0**2):
        state.S_sign = None
        return None
    s_near = None
    s_far = None
    if dq <= consts.delta_E:
        s_near = -1 if state.lambda1 > 0 else 1
    if dq >= delta:
        s_far = 1 if rep.K >= 0 else -1
    if s_near is not None and s_far is not None:
        if s_near != s_far:
            logger.warning("sign_S: regime disagreement at d_Q=%.3g "
                           "(near %+d, far %+d); using far rule", dq, s_near, s_far)
        state.S_sign = s_far
        return s_far
    s = s_near if s_near is not None else s_far
    state.S_sign = s
    return s


def fit_ejection(traj, R: float, delta_X: float) -> EjectionFit:
    """
    Least-squares exponent of log d_Q vs t on the first monotone crossing
    of the band [2R, delta_X/2].  Raises ValueError("no ejection observed")
    if the trajectory never traverses the band.
    """
    t = np.abs(traj.t)
    dQ = traj.diag["dQ"]
    lam_p = traj.diag.get("lambda_plus")
    lam_m = traj.diag.get("lambda_minus")
    lam1_0 = 0.5 * (lam_p[0] + lam_m[0]) if lam_p is not None else 0.0
    s = -1 if lam1_0 > 0 else 1

    lo, hi = 2.0 * R, 0.5 * delta_X
    good = np.isfinite(dQ)
    idx = np.where(good & (dQ >= lo))[0]
    if len(idx) == 0:
        raise ValueError("no ejection observed")
    i0 = idx[0]
    band = [i0]
    for i in range(i0 + 1, len(t)):
        if not good[i] or dQ[i] > hi:
            break
        if dQ[i] < 0.8 * dQ[band[-1]]:   # lost monotonicity; stop the window
            break
        band.append(i)
    if len(band) < 3:
        raise ValueError("no ejection observed")
    band = np.array(band)
    slope = float(np.polyfit(t[band], np.log(dQ[band]), 1)[0])

    mid = 0.5 * (lo + hi)
    K = traj.diag["K"]
    past = band[dQ[band] > mid]
    match = bool(len(past)) and all(
        (1 if K[i] >= 0 else -1) == s for i in past if np.isfinite(K[i]))
    return EjectionFit(mu_hat=slope, t_window=(float(t[band[0]]), float(t[band[-1]])),
                       R=R, s_sign=s, sign_match=match)


# ---- delta_E calibration ----

def _random_direction(rng: np.random.Generator, sd: SpectralData,
                      gs: GroundState) -> np.ndarray:
    grid = gs.grid
    r = grid.r
    w = np.zeros(grid.n, dtype=complex)
    for _ in range(4):
        r0 = rng.uniform(0.0, 6.0)
        sig = rng.uniform(0.4, 2.0)
        c = rng.normal() + 1j * rng.normal()
        w += c * np.exp(-((r - r0) ** 2) / sig**2)
    # mix in the discrete directions that dominate near the circle
    w += (rng.normal() * sd.phi + 1j * rng.normal() * sd.psi
          + rng.normal() * q_prime(gs).values)
    w[-1] = 0.0
    return w


def calibrate_constants(sd: SpectralData, gs: GroundState, n_dirs: int = 200,
                        seed: int = 0, use_cache: bool = True) -> ModulationConstants:
    """
    delta_E is the largest value <= 0.1 such that |C(v)| <= ||v||_E^2 / 2
    whenever ||v||_E <= 4*delta_E, estimated over a deterministic random
    scan of unit-energy-norm directions.  The remaining constants follow
    the smallness hierarchy defaults.
    """
    grid = gs.grid
    key = f"modconsts_n{grid.n}_rmax{grid.r_max:g}_s{seed}"
    if use_cache:
        hit = cache.load(key)
        if hit is not None:
            return ModulationConstants.from_delta_E(float(hit["delta_E"]))
    rng = np.random.default_rng(seed)
    from .functionals import integrate3d

    best = 0.1
    for _ in range(n_dirs):
        w = _random_direction(rng, sd, gs)
        en = energy_norm(w, sd, gs)
        if en < 1e-12:
            continue
        w = w / en
        c3 = abs(inner(np.abs(w) ** 2 * w, gs.Q, grid))
        c4 = 0.25 * float(integrate3d(np.abs(w) ** 4, grid))
        # worst-case |C(s*w)| <= s^3 c3 + s^4 c4 <= s^2/2 for all s <= 4 delta
        disc = 16.0 * c3**2 + 32.0 * c4
        delta_i = (-4.0 * c3 + np.sqrt(disc)) / (32.0 * c4) if c4 > 0 else \
            (1.0 / (8.0 * c3) if c3 > 0 else np.inf)
        best = min(best, float(delta_i))
    logger.info("calibrated delta_E = %.4g (%d directions)", best, n_dirs)
    if use_cache:
        cache.save(key, delta_E=np.array(best))
    return ModulationConstants.from_delta_E(best)
