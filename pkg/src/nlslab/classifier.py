# classifier.py
#
# Ensemble experiments around the soliton: construction of perturbed
# initial data on the mass shell M = M(Q), the nine-cell (backward fate,
# forward fate) scenario scan, the one-pass (no-return) check, threshold
# shooting toward the stable-manifold boundary, and the ejection-rate
# survey.
#
# Coefficient conventions: a multiplies the forward-growing mode Gp,
# b the forward-decaying mode Gm.  Conjugating a datum swaps a and b,
# so a controls the forward fate and b the backward fate.

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .evolution import (
    BLOWUP,
    SCATTER,
    TRAPPED,
    UNDECIDED,
    EvolutionConfig,
    FateThresholds,
    Trajectory,
    classify_fate,
    evolve,
    evolve_backward,
)
from .ground_state import GroundState, q_prime
from .modulation import (
    ModulationConstants,
    decompose,
    distance_dQ,
    fit_ejection,
    sign_S,
)
from .radial_grid import grad_norm2, inner
from .spectral import SpectralData
from .virial import make_weight

logger = logging.getLogger(__name__)

FATES = (BLOWUP, SCATTER, TRAPPED)


@dataclass(frozen=True)
class DataFamily:
    """Initial-datum descriptor: u0 = e^{i phase} (Q + a*Gp + b*Gm + c*Q')."""
    kind: str = "UnstablePair"
    a: float = 0.0
    b: float = 0.0
    phase: float = 0.0
    eps: float = 0.0
    rho: float = 0.0
    normalize_mass: bool = True

    @classmethod
    def sinh_seed(cls, eps: float, rho: float) -> "DataFamily":
        # lambda_plus(0) = -lambda_minus(0) = eps*rho
        return cls(kind="CoshSinh", a=eps * rho, b=-eps * rho, eps=eps, rho=rho)

    @classmethod
    def cosh_seed(cls, eps: float, sign: int) -> "DataFamily":
        return cls(kind="CoshSinh", a=sign * eps, b=sign * eps, eps=eps)


def make_initial_data(fam: DataFamily, sd: SpectralData,
                      gs: GroundState) -> np.ndarray:
    """
    Build the datum and solve the quadratic for the Q'-coefficient c so
    that M(u0) = M(Q) exactly (smallest-|c| root).  Raises when the
    quadratic has no real root ("mass normalization infeasible").
    """
    if max(abs(fam.a), abs(fam.b)) > 0.1:
        raise ValueError("perturbation outside the resolved regime")
    grid = gs.grid
    Q = gs.Q
    qp = q_prime(gs).values
    a, b = fam.a, fam.b
    pert = (a + b) * sd.phi - 1j * (a - b) * sd.psi

    if fam.normalize_mass and (a != 0.0 or b != 0.0):
        A = inner(qp, qp, grid)
        B = 2.0 * (inner(Q, qp, grid) + (a + b) * inner(qp, sd.phi, grid))
        C0 = ((a + b) ** 2 * inner(sd.phi, sd.phi, grid)
              + (a - b) ** 2 * inner(sd.psi, sd.psi, grid)
              + 2.0 * (a + b) * inner(Q, sd.phi, grid))
        disc = B * B - 4.0 * A * C0
        if disc < 0:
            raise ValueError("mass normalization infeasible")
        roots = np.array([(-B + np.sqrt(disc)) / (2 * A),
                          (-B - np.sqrt(disc)) / (2 * A)])
        c = float(roots[np.argmin(np.abs(roots))])
    else:
        c = 0.0
    return np.exp(1j * fam.phase) * (Q + pert + c * qp)


# ---- trajectory diagnostics ----

def make_modulation_hooks(sd: SpectralData, gs: GroundState,
                          consts: ModulationConstants,
                          delta: float | None = None) -> dict:
    """
    Hook set for evolve(): dQ, lambda_plus, lambda_minus, S, sharing one
    decomposition per sample.  Mass-mismatched or degenerate samples
    record dQ = +inf and NaN coefficients.
    """
    from .functionals import evaluate

    delta = consts.delta_S if delta is None else delta
    J_Q = evaluate(gs.Q, gs.grid).action
    last = {"t": None, "st": None, "u": None}

    def state_for(t, u):
        if last["t"] == t:
            return last["st"]
        try:
            st = decompose(u, sd, gs)
            distance_dQ(st, consts.delta_E)
        except (ValueError, FloatingPointError):
            st = None
        last.update(t=t, st=st, u=u)
        return st

    def h_dq(t, u):
        st = state_for(t, u)
        return st.dQ if st is not None else np.inf

    def h_lp(t, u):
        st = state_for(t, u)
        return st.lambda_plus if st is not None else np.nan

    def h_lm(t, u):
        st = state_for(t, u)
        return st.lambda_minus if st is not None else np.nan

    def h_s(t, u):
        st = state_for(t, u)
        if st is None:
            return np.nan
        s = sign_S(st, u, delta, consts, gs, J_Q=J_Q)
        return float(s) if s is not None else np.nan

    return {"dQ": h_dq, "lambda_plus": h_lp, "lambda_minus": h_lm, "S": h_s}


def make_virial_hooks(grid, m_bu: float = 20.0, m_sc: float = 20.0) -> dict:
    from .virial import virial_value

    wb = make_weight("blowup", grid, m_bu)
    ws = make_weight("scatter", grid, m_sc)
    return {"virial_bu": lambda t, u: virial_value(u, wb),
            "virial_sc": lambda t, u: virial_value(u, ws)}


def default_config(t_max: float = 3.0) -> EvolutionConfig:
    return EvolutionConfig(dt=1e-3, t_max=t_max, sample_every=10,
                           scatter_window=1.5)


def _grad_q(gs: GroundState) -> float:
    return float(np.sqrt(grad_norm2(gs.Q, gs.grid)))


def run_direction(u0: np.ndarray, sd: SpectralData, gs: GroundState,
                  consts: ModulationConstants, cfg: EvolutionConfig,
                  backward: bool = False,
                  th: FateThresholds | None = None) -> tuple:
    hooks = make_modulation_hooks(sd, gs, consts)
    runner = evolve_backward if backward else evolve
    traj = runner(u0, cfg, gs.grid, hooks=hooks, gradQ=_grad_q(gs))
    th = th or FateThresholds(R_trap=consts.delta_X, window=cfg.scatter_window)
    return classify_fate(traj, th), traj


# ---- scenario scan ----

@dataclass
class ScenarioTable:
    counts: dict = field(default_factory=dict)     # (back, fwd) -> int
    exemplars: dict = field(default_factory=dict)  # (back, fwd) -> DataFamily
    undecided: list = field(default_factory=list)

    def add(self, back: str, fwd: str, fam: DataFamily):
        if back == UNDECIDED or fwd == UNDECIDED:
            self.undecided.append((fam, back, fwd))
            return
        key = (back, fwd)
        self.counts[key] = self.counts.get(key, 0) + 1
        self.exemplars.setdefault(key, fam)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def cell(self, back: str, fwd: str) -> int:
        return self.counts.get((back, fwd), 0)


def _threshold_seed(sign_b: int, eps: float, sd, gs, consts, cfg,
                    tol: float = 1e-10) -> DataFamily:
    """Near-threshold family member (forward-trapped on the scan horizon)."""
    res = threshold_shoot(sign_b, tol, sd, gs, consts,
                          bracket=(-eps, eps), b0=sign_b * eps, cfg=cfg)
    s_mid = 0.5 * (res.s_lo + res.s_hi)
    return DataFamily(kind="NearThreshold", a=s_mid, b=sign_b * eps, eps=eps)


def _symmetric_threshold_seed(eps: float, sd, gs, consts, cfg,
                              tol: float = 1e-10) -> DataFamily:
    """Trapped-both-directions member of the real family a = b = s."""
    res = threshold_shoot(+1, tol, sd, gs, consts, bracket=(-eps, eps),
                          cfg=cfg, symmetric=True)
    s_mid = 0.5 * (res.s_lo + res.s_hi)
    return DataFamily(kind="NearThreshold", a=s_mid, b=s_mid, eps=eps)


def run_scenario_scan(sd: SpectralData, gs: GroundState,
                      consts: ModulationConstants, eps: float = 0.05,
                      cfg: EvolutionConfig | None = None) -> ScenarioTable:
    """
    Populate the nine (backward fate, forward fate) cells: cosh/sinh-type
    mode seeds give the four blow-up/scatter corners, near-threshold
    brackets (plus their conjugates) the trapped-direction cells, and the
    symmetric-family threshold member the doubly trapped cell.
    """
    cfg = cfg or default_config()
    table = ScenarioTable()

    seeds = [
        DataFamily.cosh_seed(eps, +1),          # (Blowup, Blowup)
        DataFamily.cosh_seed(eps, -1),          # (Scatter, Scatter)
        DataFamily.sinh_seed(eps, +1.0),        # (Scatter, Blowup)
        DataFamily.sinh_seed(eps, -1.0),        # (Blowup, Scatter)
        # (Trapped, Trapped): the zero datum is Q itself, but splitting
        # noise ejects it within the horizon; the real-family threshold
        # member is trapped both ways instead
        _symmetric_threshold_seed(eps, sd, gs, consts, cfg),
    ]
    # forward-trapped cells from near-threshold brackets; their conjugates
    # (a and b swapped) supply the backward-trapped cells
    for sign_b in (+1, -1):
        fam = _threshold_seed(sign_b, eps, sd, gs, consts, cfg)
        seeds.append(fam)
        seeds.append(replace(fam, a=fam.b, b=fam.a))

    trap_cfg = replace(cfg, t_max=_trap_horizon(consts, sd))
    for fam in seeds:
        run_cfg = trap_cfg if _is_near_threshold(fam) else cfg
        u0 = make_initial_data(fam, sd, gs)
        fwd, _ = run_direction(u0, sd, gs, consts, run_cfg)
        back, _ = run_direction(u0, sd, gs, consts, run_cfg, backward=True)
        table.add(back, fwd, fam)
        logger.info("scan seed a=%+.3g b=%+.3g -> (%s, %s)", fam.a, fam.b,
                    back, fwd)
    return table


def _is_near_threshold(fam: DataFamily) -> bool:
    return fam.kind == "NearThreshold"


def _trap_horizon(consts: ModulationConstants, sd: SpectralData) -> float:
    # stay below the dwell time of a 1e-10-wide bracket
    return 0.6 * np.log(consts.delta_X / 1e-10) / sd.mu


# ---- one-pass check ----

@dataclass(frozen=True)
class OnePassReport:
    n_trajectories: int
    n_exiting: int
    violations: int
    sign_flips: int
    R: float


def one_pass_check(sd: SpectralData, gs: GroundState,
                   consts: ModulationConstants, R: float | None = None,
                   n_traj: int = 100, seed: int = 0,
                   cfg: EvolutionConfig | None = None) -> OnePassReport:
    """
    Start inside d_Q < R, watch every trajectory that reaches R + R^2, and
    count returns below R (expected: none) and post-exit sign changes of S.
    Seeds keep |lambda_2| < |lambda_1| so the admissible energy region
    contains the whole run.
    """
    R = consts.R_star if R is None else R
    if not (2.0 * consts.eps_star < R <= consts.R_star):
        raise ValueError("R outside the (2 eps*, R*] band")
    cfg = cfg or default_config(t_max=2.5)
    rng = np.random.default_rng(seed)

    amp = 0.6 * R / np.sqrt(sd.mu / 2.0)
    n_exit = violations = flips = 0
    for _ in range(n_traj):
        s = rng.choice([-1.0, 1.0])
        xi = rng.uniform(0.25, 1.0)
        scl = rng.uniform(0.5, 1.0) * 2.0 / (1.0 + xi)
        fam = DataFamily(a=s * amp * scl, b=s * amp * scl * xi,
                         phase=rng.uniform(0.0, 2.0 * np.pi))
        u0 = make_initial_data(fam, sd, gs)
        hooks = make_modulation_hooks(sd, gs, consts)
        traj = evolve(u0, cfg, gs.grid, hooks=hooks, gradQ=_grad_q(gs))
        dQ = traj.diag["dQ"]
        S = traj.diag["S"]
        if not (np.isfinite(dQ[0]) and dQ[0] < R):
            continue
        exits = np.where(dQ >= R + R * R)[0]
        if len(exits) == 0:
            continue
        n_exit += 1
        i0 = exits[0]
        if np.any(dQ[i0:] < R):
            violations += 1
        post = S[i0:][np.isfinite(S[i0:])]
        if len(post) and not np.all(post == post[0]):
            flips += 1
    logger.info("one-pass: %d exiting, %d violations, %d sign flips",
                n_exit, violations, flips)
    return OnePassReport(n_trajectories=n_traj, n_exiting=n_exit,
                         violations=violations, sign_flips=flips, R=R)


# ---- threshold shooting ----

@dataclass(frozen=True)
class ThresholdResult:
    s_lo: float
    s_hi: float
    b0: float
    dwell: dict                 # bracket width -> dwell time (d_Q < delta_X)
    approach_rate: float        # fitted decay rate of d_Q during the dwell
    fates: tuple                # (fate at s_lo, fate at s_hi)


def threshold_shoot(direction: int, tol: float, sd: SpectralData,
                    gs: GroundState, consts: ModulationConstants,
                    bracket: tuple = (-0.05, 0.05), b0: float | None = None,
                    cfg: EvolutionConfig | None = None,
                    dwell_probe_widths: tuple = (1e-2, 1e-6),
                    symmetric: bool = False) -> ThresholdResult:
    """
    Bisect the Gp-coefficient s of u0(s) = N(Q + s*Gp + b0*Gm) between
    opposite forward fates until |s_hi - s_lo| <= tol.  Near-threshold
    trajectories shadow the soliton; the dwell time grows like
    log(1/width)/mu as the bracket shrinks.

    With symmetric=True the family is a = b = s (real data), whose
    threshold member is trapped in both time directions at once.
    """
    cfg = cfg or default_config()
    b0 = direction * 0.05 if b0 is None else b0

    def fate_of(s: float, horizon: float) -> tuple:
        fam = DataFamily(a=s, b=s if symmetric else b0)
        u0 = make_initial_data(fam, sd, gs)
        run_cfg = replace(cfg, t_max=horizon)
        label, traj = run_direction(u0, sd, gs, consts, run_cfg)
        return label, traj

    def decided_fate(s: float, width: float) -> tuple:
        horizon = max(cfg.t_max,
                      np.log(consts.delta_X / max(width, 1e-12)) / sd.mu + 1.5)
        for _ in range(3):
            label, traj = fate_of(s, horizon)
            if label in (BLOWUP, SCATTER):
                return label, traj
            horizon *= 1.5
        return label, traj

    s_lo, s_hi = bracket
    f_lo, _ = decided_fate(s_lo, s_hi - s_lo)
    f_hi, _ = decided_fate(s_hi, s_hi - s_lo)
    if f_lo == f_hi or UNDECIDED in (f_lo, f_hi):
        raise RuntimeError("no threshold in bracket")

    dwell = {}
    rate = np.nan
    while s_hi - s_lo > tol:
        mid = 0.5 * (s_lo + s_hi)
        width = s_hi - s_lo
        label, traj = decided_fate(mid, width)
        if label == f_hi:
            s_hi = mid
        else:
            s_lo = mid
        for wtarget in dwell_probe_widths:
            if wtarget not in dwell and width / 2.0 <= wtarget:
                dwell[wtarget] = _dwell_time(traj, consts.delta_X)
                rate = _approach_rate(traj)
                break
    logger.info("threshold: [%.12g, %.12g], dwell=%s rate=%.3f",
                s_lo, s_hi, dwell, rate)
    return ThresholdResult(s_lo=s_lo, s_hi=s_hi, b0=b0, dwell=dwell,
                           approach_rate=rate, fates=(f_lo, f_hi))


def _dwell_time(traj: Trajectory, delta_X: float) -> float:
    t = np.abs(traj.t)
    dQ = traj.diag["dQ"]
    near = np.isfinite(dQ) & (dQ < delta_X)
    return float(t[near][-1] - t[near][0]) if near.sum() >= 2 else 0.0


def _approach_rate(traj: Trajectory) -> float:
    """Fitted decay rate of d_Q on its decreasing segment (approach phase)."""
    t = np.abs(traj.t)
    dQ = traj.diag["dQ"]
    good = np.isfinite(dQ) & (dQ > 0)
    t, dQ = t[good], dQ[good]
    if len(dQ) < 5:
        return np.nan
    imin = int(np.argmin(dQ))
    floor = dQ[imin]
    seg = np.where(dQ[:imin] > 3.0 * floor)[0]
    if len(seg) < 3:
        return np.nan
    sl = float(np.polyfit(t[seg], np.log(dQ[seg]), 1)[0])
    return -sl


# ---- ejection survey ----

def ejection_survey(R_list, n_seeds: int, sd: SpectralData, gs: GroundState,
                    consts: ModulationConstants, seed: int = 0,
                    fit_delta_X: float = 0.3,
                    cfg: EvolutionConfig | None = None) -> list:
    """
    Batch of ejection fits: random-phase unstable seeds at start distance
    ~R/2, fitted over the band [2R, fit_delta_X/2].  Returns a list of
    (R, seed index, EjectionFit).
    """
    cfg = cfg or default_config(t_max=2.0)
    rng = np.random.default_rng(seed)
    out = []
    for R in R_list:
        for i in range(n_seeds):
            a = rng.choice([-1.0, 1.0]) * 0.5 * R / np.sqrt(sd.mu / 2.0)
            fam = DataFamily(a=a, phase=rng.uniform(0.0, 2.0 * np.pi))
            u0 = make_initial_data(fam, sd, gs)
            hooks = make_modulation_hooks(sd, gs, consts)
            traj = evolve(u0, cfg, gs.grid, hooks=hooks, gradQ=_grad_q(gs))
            out.append((R, i, fit_ejection(traj, R, fit_delta_X)))
    return out
