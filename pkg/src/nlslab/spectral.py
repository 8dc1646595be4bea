# spectral.py
#
# Linearization around the ground state:
#   L_minus = -Delta + 1 - Q^2,   L_plus = -Delta + 1 - 3Q^2
# with the unstable eigenpair
#   L_minus psi = mu phi,   L_plus phi = -mu psi,   mu > 0,
# the modes Gfrak_pm = phi -+ i psi, the 2x2-block matrix Hamiltonian
# H(alpha, gamma) with its root space and Riesz projections, and a
# spectral-gap scan with two-grid persistence filtering.
#
# All operators act through the substitution v = r*u, where -Delta is
# diagonal in the sine basis; dense matrices are only ever assembled on
# coarse auxiliary grids.

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.sparse.linalg import LinearOperator, gmres

from . import cache
from .ground_state import GroundState, q_prime, scale, solve_ground_state
from .radial_grid import (
    RadialGrid,
    dst1,
    inner,
    laplacian_v,
    make_grid,
    scaling_derivative,
)

logger = logging.getLogger(__name__)


# ---- linearized pair ----

@dataclass(frozen=True)
class LinearizedPair:
    grid: RadialGrid
    Q: np.ndarray
    lm_q_residual: float       # ||L_minus Q|| / ||Q||
    lp_qprime_residual: float  # ||L_plus Q' + 2Q|| / ||Q||

    def apply_lm(self, u: np.ndarray) -> np.ndarray:
        return _apply_schroedinger(u, self.Q**2, self.grid)

    def apply_lp(self, u: np.ndarray) -> np.ndarray:
        return _apply_schroedinger(u, 3.0 * self.Q**2, self.grid)

    def apply_lm_v(self, x: np.ndarray) -> np.ndarray:
        W = (self.Q**2)[: self.grid.m]
        return -laplacian_v(x, self.grid) + x - W * x

    def apply_lp_v(self, x: np.ndarray) -> np.ndarray:
        W = (3.0 * self.Q**2)[: self.grid.m]
        return -laplacian_v(x, self.grid) + x - W * x


def _apply_schroedinger(u: np.ndarray, W: np.ndarray, grid: RadialGrid) -> np.ndarray:
    """(-Delta + 1 - W) u through the v = r*u substitution."""
    u = np.asarray(u)
    out = np.zeros_like(u, dtype=u.dtype)
    v = (grid.r * u)[: grid.m]
    if np.iscomplexobj(u):
        lap = -dst1(dst1(v.real) * grid.lam) - 1j * dst1(dst1(v.imag) * grid.lam)
    else:
        lap = -dst1(dst1(v) * grid.lam)
    out[: grid.m] = (-lap + v) / grid.r[: grid.m] - W[: grid.m] * u[: grid.m]
    return out


def build_linearized(Q_state: GroundState) -> LinearizedPair:
    grid = Q_state.grid
    Q = Q_state.Q
    nq = np.sqrt(inner(Q, Q, grid))
    lmq = _apply_schroedinger(Q, Q**2, grid)
    qp = q_prime(Q_state).values
    lpqp = _apply_schroedinger(qp, 3.0 * Q**2, grid) + 2.0 * Q
    pair = LinearizedPair(
        grid=grid,
        Q=Q,
        lm_q_residual=float(np.sqrt(inner(lmq, lmq, grid))) / nq,
        lp_qprime_residual=float(np.sqrt(inner(lpqp, lpqp, grid))) / nq,
    )
    logger.info("linearized pair: |L-Q|=%.2e  |L+Q'+2Q|=%.2e",
                pair.lm_q_residual, pair.lp_qprime_residual)
    return pair


# ---- dense helpers (coarse grids only) ----

def sine_matrix(grid: RadialGrid) -> np.ndarray:
    j = np.arange(1, grid.n)
    return np.sqrt(2.0 / grid.n) * np.sin(np.pi * np.outer(j, j) / grid.n)


def dense_lpair_v(Q_state: GroundState):
    """Dense v-space matrices (L_minus, L_plus) on the state's grid."""
    grid = Q_state.grid
    S = sine_matrix(grid)
    D = S @ (grid.lam[:, None] * S)
    Q2 = (Q_state.Q[: grid.m]) ** 2
    eye = np.eye(grid.m)
    Lm = D + eye - np.diag(Q2)
    Lp = D + eye - np.diag(3.0 * Q2)
    return Lm, Lp


# ---- unstable mode ----

@dataclass(frozen=True)
class SpectralData:
    grid: RadialGrid
    mu: float
    phi: np.ndarray            # real, <phi|psi> = 1/2
    psi: np.ndarray            # real, <psi|Q> > 0
    G_plus: np.ndarray = field(repr=False)   # (2, n) complex, H G+ = -i mu G+
    G_minus: np.ndarray = field(repr=False)  # componentwise conjugate of G+

    @property
    def g_plus(self) -> np.ndarray:
        """Gfrak_plus = phi - i psi (the forward-growing mode)."""
        return self.phi - 1j * self.psi

    @property
    def g_minus(self) -> np.ndarray:
        return self.phi + 1j * self.psi


def _coarse_mode(r_max: float, n_coarse: int):
    gs_c = solve_ground_state(make_grid(n_coarse, r_max), tol=1e-7)
    Lm, Lp = dense_lpair_v(gs_c)
    ev, vec = sla.eig(Lm @ Lp)
    idx = np.where((np.abs(ev.imag) < 1e-8) & (ev.real < -1e-6))[0]
    if len(idx) == 0:
        raise RuntimeError("no unstable mode")
    i = idx[np.argmin(ev.real[idx])]
    mu2 = -float(ev.real[i])
    phv = np.real(vec[:, i])
    return gs_c, mu2, phv


def solve_unstable_mode(pair: LinearizedPair, tol: float = 1e-9,
                        n_coarse: int = 512, use_cache: bool = True) -> SpectralData:
    """
    Unstable eigenpair on the pair's grid: dense coarse-grid eigensolve of
    L_minus L_plus for the starting guess, then preconditioned inverse
    iteration with the exact sine-spectral operators.

    Raises RuntimeError("no unstable mode") if the coarse eigensolve finds
    no negative real eigenvalue (grid too coarse).
    """
    grid = pair.grid
    key = f"sp_n{grid.n}_rmax{grid.r_max:g}"
    if use_cache:
        hit = cache.load(key)
        if hit is not None:
            return _assemble(pair, float(hit["mu"]), hit["phi"], hit["psi"])

    gs_c, mu2, phv_c = _coarse_mode(grid.r_max, min(n_coarse, grid.n))
    if grid.n > gs_c.grid.n:
        from scipy.interpolate import CubicSpline

        xs = np.concatenate(([0.0], gs_c.grid.r[: gs_c.grid.m]))
        ys = np.concatenate(([0.0], phv_c))
        phv = CubicSpline(xs, ys)(grid.r[: grid.m])
        phv[grid.r[: grid.m] > gs_c.grid.r[gs_c.grid.m - 1]] = 0.0
    else:
        phv = phv_c[: grid.m]
    phv = phv / np.linalg.norm(phv)

    m = grid.m
    A = lambda x: pair.apply_lm_v(pair.apply_lp_v(x))
    # applying L-L+ amplifies roundoff by lam_max^2, so the relative
    # residual of the composite operator has a grid-dependent floor
    tol = max(tol, 5.0 * np.finfo(float).eps * (grid.lam[-1] + 1.0) ** 2 / mu2)
    res = np.inf
    for it in range(20):
        # moderate detuning: contraction per step is ~detuning/gap, and the
        # shifted solve stays well conditioned for GMRES even on fine grids
        sigma = -mu2 * (1.0 + 1e-3)
        Minv = LinearOperator(
            (m, m),
            matvec=lambda x, s=sigma: dst1(dst1(x) / ((grid.lam + 1.0) ** 2 - s)))
        Ash = LinearOperator((m, m), matvec=lambda x, s=sigma: A(x) - s * x)
        x, _ = gmres(Ash, phv, M=Minv, rtol=1e-11, atol=0.0, maxiter=300)
        phv = x / np.linalg.norm(x)
        Aph = A(phv)
        mu2 = -float(phv @ Aph)
        res = float(np.linalg.norm(Aph + mu2 * phv)) / mu2
        if res < tol:
            break
    if res >= tol:
        raise RuntimeError(f"unstable-mode refinement stalled at {res:.2e}")
    mu = float(np.sqrt(mu2))
    logger.info("unstable mode: mu=%.10f residual=%.2e (its=%d)", mu, res, it + 1)

    phi = np.zeros(grid.n)
    phi[: grid.m] = phv / grid.r[: grid.m]
    psv = -pair.apply_lp_v(phv) / mu
    psi = np.zeros(grid.n)
    psi[: grid.m] = psv / grid.r[: grid.m]

    if use_cache:
        cache.save(key, mu=np.array(mu), phi=phi, psi=psi)
    return _assemble(pair, mu, phi, psi)


def _assemble(pair: LinearizedPair, mu: float, phi: np.ndarray,
              psi: np.ndarray) -> SpectralData:
    grid = pair.grid
    ip = inner(phi, psi, grid)
    if ip <= 0:
        raise RuntimeError("sign convention undefined")
    c = np.sqrt(0.5 / ip)
    phi = c * phi
    psi = c * psi
    if inner(psi, pair.Q, grid) < 0:
        phi, psi = -phi, -psi

    # matrix eigenvectors: g from Gfrak_plus, normalized ||G|| = 1,
    # eigen-sign fixed empirically so that H G+ = -i mu G+
    nrm = np.sqrt(2.0 * (inner(phi, phi, grid) + inner(psi, psi, grid)))
    g = (phi - 1j * psi) / nrm
    cand = np.array([g, np.conj(g)])
    gs_like = GroundState(grid=grid, Q=pair.Q, q0=float("nan"), alpha=1.0,
                          residual_norm=0.0)
    H = build_matrix_hamiltonian(gs_like, 1.0, 0.0)
    lam_est = _pair2(H.apply(cand), cand, grid) / _pair2(cand, cand, grid)
    if lam_est.imag > 0:
        cand = np.conj(cand)
    return SpectralData(grid=grid, mu=mu, phi=phi, psi=psi,
                        G_plus=cand, G_minus=np.conj(cand))


def mu_symmetric_route(r_max: float, n_coarse: int = 256) -> float:
    """
    Independent route to mu: lowest eigenvalue of the symmetrized operator
    sqrt(L_minus) L_plus sqrt(L_minus) equals -mu^2.  Dense, coarse grid.
    """
    gs_c = solve_ground_state(make_grid(n_coarse, r_max), tol=1e-7)
    Lm, Lp = dense_lpair_v(gs_c)
    w, U = sla.eigh(Lm)
    Smat = U @ (np.sqrt(np.clip(w, 0.0, None))[:, None] * U.T)
    lo = float(sla.eigh(Smat @ Lp @ Smat, eigvals_only=True)[0])
    return float(np.sqrt(-lo))


# ---- matrix Hamiltonian ----

def _pair2(A: np.ndarray, B: np.ndarray, grid: RadialGrid) -> complex:
    """Complex L^2 pairing of two-component fields (4*pi*r^2 weight)."""
    s = np.sum(A * np.conj(B) * grid.r**2)
    return complex(4.0 * np.pi * grid.h * s)


def _sigma3(W: np.ndarray) -> np.ndarray:
    out = W.copy()
    out[1] = -out[1]
    return out


@dataclass(frozen=True)
class MatrixHamiltonian:
    grid: RadialGrid
    alpha: float
    gamma: float
    Qa: np.ndarray
    xi0: np.ndarray = field(repr=False)    # (2, n): kernel vector
    eta0: np.ndarray = field(repr=False)   # (2, n): H eta0 proportional to xi0
    spectral: "SpectralData | None" = field(default=None, repr=False)

    def apply(self, W: np.ndarray) -> np.ndarray:
        grid = self.grid
        a2 = self.alpha**2
        Q2 = self.Qa**2
        w1, w2 = W[0], W[1]
        lap1 = _lap_c(w1, grid)
        lap2 = _lap_c(w2, grid)
        e2g = np.exp(2j * self.gamma)
        r1 = -lap1 + a2 * w1 - 2.0 * Q2 * w1 - e2g * Q2 * w2
        r2 = np.conj(e2g) * Q2 * w1 + lap2 - a2 * w2 + 2.0 * Q2 * w2
        return np.array([r1, r2])

    # Riesz projections (require spectral data; alpha = 1, gamma = 0)
    def _need_spec(self) -> SpectralData:
        if self.spectral is None:
            raise ValueError("projections need spectral data")
        return self.spectral

    def p_plus(self, W: np.ndarray) -> np.ndarray:
        sd = self._need_spec()
        den = _pair2(sd.G_plus, _sigma3(sd.G_minus), self.grid)
        return sd.G_plus * (_pair2(W, _sigma3(sd.G_minus), self.grid) / den)

    def p_minus(self, W: np.ndarray) -> np.ndarray:
        sd = self._need_spec()
        den = _pair2(sd.G_minus, _sigma3(sd.G_plus), self.grid)
        return sd.G_minus * (_pair2(W, _sigma3(sd.G_plus), self.grid) / den)

    def p_zero(self, W: np.ndarray) -> np.ndarray:
        den = _pair2(self.xi0, _sigma3(self.eta0), self.grid)
        return (self.xi0 * (_pair2(W, _sigma3(self.eta0), self.grid) / den)
                + self.eta0 * (_pair2(W, _sigma3(self.xi0), self.grid) / den))

    def p_continuous(self, W: np.ndarray) -> np.ndarray:
        return W - self.p_plus(W) - self.p_minus(W) - self.p_zero(W)

    def extract_lambda(self, W: np.ndarray) -> tuple[complex, complex]:
        """Riesz coefficients on G+ and G-; real for admissible W = (w, conj w)."""
        sd = self._need_spec()
        cp = (_pair2(W, _sigma3(sd.G_minus), self.grid)
              / _pair2(sd.G_plus, _sigma3(sd.G_minus), self.grid))
        cm = (_pair2(W, _sigma3(sd.G_plus), self.grid)
              / _pair2(sd.G_minus, _sigma3(sd.G_plus), self.grid))
        return cp, cm


def _lap_c(w: np.ndarray, grid: RadialGrid) -> np.ndarray:
    v = (grid.r * w)[: grid.m]
    lap = -dst1(dst1(v.real) * grid.lam).astype(complex)
    if np.iscomplexobj(w):
        lap = lap - 1j * dst1(dst1(v.imag) * grid.lam)
    out = np.zeros(grid.n, dtype=complex)
    out[: grid.m] = lap / grid.r[: grid.m]
    return out


def build_matrix_hamiltonian(Q_state: GroundState, alpha: float, gamma: float,
                             spectral: SpectralData | None = None) -> MatrixHamiltonian:
    """
    Assemble H(alpha, gamma) on the state's grid, with the root-space
    vectors xi0 (kernel) and eta0 (generalized kernel).
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    gsa = Q_state if alpha == 1.0 else scale(Q_state, alpha)
    Qa = gsa.Q
    Qpa = scaling_derivative(Qa, Q_state.grid)
    eg = np.exp(1j * gamma)
    xi0 = np.array([eg * Qa, -np.conj(eg) * Qa], dtype=complex)
    eta0 = np.array([eg * Qpa, np.conj(eg) * Qpa], dtype=complex)
    return MatrixHamiltonian(grid=Q_state.grid, alpha=alpha, gamma=gamma,
                             Qa=Qa, xi0=xi0, eta0=eta0, spectral=spectral)


def dense_matrix_hamiltonian(Q_state: GroundState, alpha: float,
                             gamma: float) -> np.ndarray:
    """Dense (2m x 2m) v-space matrix of H(alpha, gamma); coarse grids only."""
    grid = Q_state.grid
    gsa = Q_state if alpha == 1.0 else scale(Q_state, alpha)
    S = sine_matrix(grid)
    D = S @ (grid.lam[:, None] * S)
    Q2 = (gsa.Q[: grid.m]) ** 2
    a2 = alpha**2
    e2g = np.exp(2j * gamma)
    m = grid.m
    H = np.zeros((2 * m, 2 * m), dtype=complex if gamma != 0.0 else float)
    H[:m, :m] = D + a2 * np.eye(m) - 2.0 * np.diag(Q2)
    H[:m, m:] = -(e2g if gamma != 0.0 else 1.0) * np.diag(Q2)
    H[m:, :m] = (np.conj(e2g) if gamma != 0.0 else 1.0) * np.diag(Q2)
    H[m:, m:] = -D - a2 * np.eye(m) + 2.0 * np.diag(Q2)
    return H


# ---- gap scan ----

@dataclass(frozen=True)
class GapScanReport:
    eigenvalues: list          # persistent gap eigenvalues (finest grid)
    zero_multiplicity: int
    mu_imag: float             # Im of the +i mu member
    mu_drift: float            # two-grid relative drift of mu
    spurious: list             # candidates failing persistence
    grids: tuple


def gap_scan(H: MatrixHamiltonian, band: tuple = (-0.9, 0.9),
             n_scan: tuple = (512, 1024), use_cache: bool = True) -> GapScanReport:
    """
    Eigenvalues of H inside the essential-spectrum gap, filtered by
    two-grid persistence (|delta lambda| < 1e-3 between resolutions).
    The band is in units of alpha^2; expected surviving content:
    {0 (x2), +i mu, -i mu}.
    """
    lo, hi = band
    if lo >= hi:
        return GapScanReport(eigenvalues=[], zero_multiplicity=0, mu_imag=0.0,
                             mu_drift=0.0, spurious=[], grids=n_scan)
    a2 = H.alpha**2
    per_grid = []
    for n in n_scan:
        key = f"gap_n{n}_rmax{H.grid.r_max:g}_a{H.alpha:g}_g{H.gamma:g}"
        hit = cache.load(key) if use_cache else None
        if hit is not None:
            ev = hit["ev"]
        else:
            gs_c = solve_ground_state(make_grid(n, H.grid.r_max), tol=1e-7)
            ev = sla.eigvals(dense_matrix_hamiltonian(gs_c, H.alpha, H.gamma))
            if use_cache:
                cache.save(key, ev=ev)
        sel = ev[(ev.real > lo * a2) & (ev.real < hi * a2)]
        per_grid.append(np.sort_complex(sel))

    fine = per_grid[-1]
    coarse = per_grid[0]
    persistent, spurious = [], []
    for lam in fine:
        d = np.min(np.abs(coarse - lam)) if len(coarse) else np.inf
        (persistent if d < 1e-3 else spurious).append(complex(lam))

    zero = [z for z in persistent if abs(z) < 1e-3]
    imag_pos = [z for z in persistent if z.imag > 1e-3]
    imag_neg = [z for z in persistent if z.imag < -1e-3]
    mu_imag = imag_pos[0].imag if imag_pos else 0.0
    drift = 0.0
    if imag_pos:
        mc = coarse[np.argmin(np.abs(coarse - imag_pos[0]))]
        drift = abs(abs(mc.imag) - mu_imag) / mu_imag
    logger.info("gap scan: %d persistent (%d at zero), mu=%.8f drift=%.2e",
                len(persistent), len(zero), mu_imag, drift)
    return GapScanReport(eigenvalues=persistent, zero_multiplicity=len(zero),
                         mu_imag=float(mu_imag), mu_drift=float(drift),
                         spurious=spurious,
                         grids=n_scan)
