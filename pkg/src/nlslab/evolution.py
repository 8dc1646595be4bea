# evolution.py
#
# Time integration of  i du/dt = Delta u + |u|^2 u  (so the soliton is
# e^{-it} Q) by Strang splitting: the nonlinear substep is an exact phase
# rotation, the linear substep is exact in the sine basis.  Both substeps
# preserve mass pointwise/exactly, so mass drift is pure roundoff.
#
# Blow-up is detected, never resolved; scattering is a heuristic label
# from three concurrent indicators; Undecided is an honest outcome.

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .functionals import evaluate
from .radial_grid import RadialGrid, dst1, grad_norm2, l2_norm2

logger = logging.getLogger(__name__)

STOP_TMAX = "ReachedTmax"
STOP_BLOWUP = "BlowupDetected"
STOP_WALL = "WallContamination"

CORE_RADIUS = 5.0   # scattering indicator watches the mass inside r < 5


@dataclass(frozen=True)
class EvolutionConfig:
    dt: float = 1e-3
    t_max: float = 10.0
    sample_every: int = 10            # diagnostic cadence in steps
    blowup_gradient_threshold: float | None = None  # None -> 1e3*||grad Q||
    dt_adapt: bool = True
    scatter_window: float = 2.0
    outer_shell_fraction: float = 1e-3
    snapshot_every: int = 0           # field snapshots every k samples; 0 = off
    max_halvings: int = 30

    def __post_init__(self):
        if self.dt <= 0 or self.t_max <= 0:
            raise ValueError("dt and t_max must be positive")


@dataclass
class Trajectory:
    grid: RadialGrid
    t: np.ndarray
    diag: dict                        # name -> np.ndarray aligned with t
    snapshots: list                   # (t, field) pairs
    stop_reason: str
    stop_time: float

    def column(self, name: str) -> np.ndarray:
        return self.diag[name]


GRADQ_DEFAULT = 7.5297  # ||grad Q||_2 on the default grid (updated by callers)


def step(u: np.ndarray, dt: float, grid: RadialGrid) -> np.ndarray:
    """One Strang step: half nonlinear phase, full linear, half nonlinear."""
    u = u * np.exp(-0.5j * dt * np.abs(u) ** 2)
    v = grid.r * u
    out = np.zeros_like(v)
    out[: grid.m] = dst1(dst1(v[: grid.m]) * np.exp(1j * dt * grid.lam))
    u = out / grid.r
    return u * np.exp(-0.5j * dt * np.abs(u) ** 2)


def effective_blowup_threshold(cfg: EvolutionConfig, grid: RadialGrid,
                               u0_l2: float, gradQ: float) -> float:
    """
    Configured gradient threshold capped at what the mesh can represent:
    the largest gradient norm of a field with the given mass is
    (pi/h)*||u||_2, and detection must happen while still resolved.
    """
    want = cfg.blowup_gradient_threshold
    if want is None:
        want = 1e3 * gradQ
    cap = 0.15 * (np.pi / grid.h) * u0_l2
    return min(want, cap)


def evolve(u0: np.ndarray, cfg: EvolutionConfig, grid: RadialGrid,
           hooks: dict | None = None, gradQ: float = GRADQ_DEFAULT) -> Trajectory:
    """
    Advance u0 under the flow, recording diagnostics every
    cfg.sample_every steps.  Built-in columns: M, E, K, grad_norm, L4,
    mass_core, mass_shell; extra columns come from hooks, a dict
    name -> f(t, u) evaluated at each sample.

    Never raises on abnormal dynamics; all endings are stop_reasons.
    """
    u = np.asarray(u0, dtype=complex).copy()
    hooks = hooks or {}
    names = ["M", "E", "K", "grad_norm", "L4", "mass_core", "mass_shell"] + \
        list(hooks.keys())
    rows = {k: [] for k in names}
    times, snaps = [], []

    M0 = 0.5 * l2_norm2(u, grid)
    thr = effective_blowup_threshold(cfg, grid, np.sqrt(2.0 * M0), gradQ)
    core = grid.r < CORE_RADIUS
    shell = grid.r > 0.9 * grid.r_max

    dt = cfg.dt
    halvings = 0
    t = 0.0
    stop = STOP_TMAX
    grad_ref = None
    isample = 0

    def record(t, u):
        g2 = grad_norm2(u, grid)
        rep = None
        try:
            rep = evaluate(u, grid)
        except ValueError:
            pass
        times.append(t)
        rows["grad_norm"].append(np.sqrt(g2))
        rows["M"].append(rep.mass if rep else np.nan)
        rows["E"].append(rep.energy if rep else np.nan)
        rows["K"].append(rep.K if rep else np.nan)
        rows["L4"].append(rep.l4_4 ** 0.25 if rep else np.nan)
        rows["mass_core"].append(
            0.5 * 4.0 * np.pi * grid.h * float(np.sum(np.abs(u[core]) ** 2 * grid.r[core] ** 2)))
        rows["mass_shell"].append(
            0.5 * 4.0 * np.pi * grid.h * float(np.sum(np.abs(u[shell]) ** 2 * grid.r[shell] ** 2)))
        for name, f in hooks.items():
            try:
                rows[name].append(float(f(t, u)))
            except Exception:
                rows[name].append(np.nan)
        return np.sqrt(g2)

    g = record(0.0, u)
    grad_ref = g
    if cfg.snapshot_every:
        snaps.append((0.0, u.copy()))

    while t < cfg.t_max - 1e-12:
        dt_step = min(dt, cfg.t_max - t)
        u = step(u, dt_step, grid)
        t += dt_step
        isample += 1
        if not np.all(np.isfinite(u)):
            stop = STOP_BLOWUP
            record(t, np.nan_to_num(u, nan=0.0, posinf=0.0, neginf=0.0))
            break
        if isample % cfg.sample_every == 0:
            g = record(t, u)
            if cfg.snapshot_every and \
                    (isample // cfg.sample_every) % cfg.snapshot_every == 0:
                snaps.append((t, u.copy()))
            if g > thr:
                stop = STOP_BLOWUP
                break
            if rows["mass_shell"][-1] > cfg.outer_shell_fraction * M0:
                stop = STOP_WALL
                break
            if cfg.dt_adapt and g > 2.0 * grad_ref and halvings < cfg.max_halvings:
                dt *= 0.5
                halvings += 1
                grad_ref = g

    traj = Trajectory(grid=grid, t=np.array(times),
                      diag={k: np.array(v) for k, v in rows.items()},
                      snapshots=snaps, stop_reason=stop, stop_time=t)
    logger.info("evolve: t=%.3f stop=%s (halvings=%d)", t, stop, halvings)
    return traj


def evolve_backward(u0: np.ndarray, cfg: EvolutionConfig, grid: RadialGrid,
                    hooks: dict | None = None,
                    gradQ: float = GRADQ_DEFAULT) -> Trajectory:
    """
    Backward-in-time trajectory via the conjugation symmetry: evolve
    conj(u0) forward and relabel the times negatively.
    """
    traj = evolve(np.conj(np.asarray(u0, dtype=complex)), cfg, grid,
                  hooks=hooks, gradQ=gradQ)
    traj.t = -traj.t
    traj.snapshots = [(-t, np.conj(f)) for t, f in traj.snapshots]
    traj.stop_time = -traj.stop_time
    return traj


# ---- fate classification ----

@dataclass(frozen=True)
class FateThresholds:
    R_trap: float = 0.05          # trapped: d_Q below this in the final window
    window: float = 2.0           # length of the final assessment window
    scatter_K_min: float = 0.0    # scatter needs K persistently above this
    core_decay_tol: float = 1.05  # allowed non-monotonicity factor for core mass


BLOWUP = "Blowup"
SCATTER = "Scatter"
TRAPPED = "Trapped"
UNDECIDED = "Undecided"


def classify_fate(traj: Trajectory, th: FateThresholds = FateThresholds()) -> str:
    """
    Label one time direction:
      Blowup    stop_reason BlowupDetected with K negative and decreasing
                in the final window (K -> -inf mechanism);
      Trapped   reached t_max with d_Q < R_trap throughout the final window;
      Scatter   d_Q stays large, K > 0 persistently and the mass inside
                r < 5 decays over the final window;
      Undecided anything else.
    """
    t = np.abs(traj.t)
    if len(t) < 3:
        return UNDECIDED
    K = traj.diag["K"]
    last = t >= t[-1] - th.window

    if traj.stop_reason == STOP_BLOWUP:
        # the detection sample itself sits past the resolved-gradient
        # threshold and can alias; judge the window that precedes it
        Kw = K[last & np.isfinite(K)][:-1]
        if len(Kw) >= 2 and Kw[-1] < 0 and Kw[-1] <= Kw[0]:
            return BLOWUP
        return UNDECIDED

    dQ = traj.diag.get("dQ")
    if traj.stop_reason == STOP_TMAX and dQ is not None:
        w = dQ[last]
        if np.all(np.isfinite(w)) and np.all(w < th.R_trap):
            return TRAPPED

    # scattering: assess on the last clean window (pre-wall if stopped there)
    valid = np.isfinite(K)
    if valid.sum() >= 3:
        tv = t[valid]
        lastv = tv >= tv[-1] - th.window
        Kw = K[valid][lastv]
        core = traj.diag["mass_core"][valid][lastv]
        dq_ok = True
        if dQ is not None:
            dqv = dQ[valid][lastv]
            dq_ok = np.all(~np.isfinite(dqv) | (dqv > th.R_trap))
        if (len(Kw) >= 3 and np.all(Kw > th.scatter_K_min) and dq_ok
                and core[-1] < core[0]
                and np.all(core[1:] <= th.core_decay_tol * core[:-1])):
            return SCATTER
    return UNDECIDED
