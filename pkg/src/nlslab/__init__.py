"""
nlslab: a numerical laboratory for the 3D radial focusing cubic NLS

    i du/dt = Delta u + |u|^2 u,

centered on the dynamics near the ground-state soliton e^{-it} Q:
ground-state computation, linearized spectrum, modulation decomposition,
saturated virial monitors, and ensemble classification of blow-up /
scattering / trapped behaviour in both time directions.
"""

__version__ = "0.1.0"

from .classifier import (
    DataFamily,
    OnePassReport,
    ScenarioTable,
    ThresholdResult,
    ejection_survey,
    make_initial_data,
    make_modulation_hooks,
    make_virial_hooks,
    one_pass_check,
    run_direction,
    run_scenario_scan,
    threshold_shoot,
)
from .evolution import (
    EvolutionConfig,
    FateThresholds,
    Trajectory,
    classify_fate,
    evolve,
    evolve_backward,
)
from .functionals import FunctionalReport, evaluate, verify_radial_sobolev
from .ground_state import GroundState, q_prime, scale, solve_ground_state
from .modulation import (
    EjectionFit,
    ModulationConstants,
    ModulationState,
    calibrate_constants,
    decompose,
    distance_dQ,
    energy_norm,
    fit_ejection,
    sign_S,
)
from .radial_grid import RadialField, RadialGrid, make_grid
from .spectral import (
    GapScanReport,
    LinearizedPair,
    MatrixHamiltonian,
    SpectralData,
    build_linearized,
    build_matrix_hamiltonian,
    gap_scan,
    solve_unstable_mode,
)
from .virial import (
    VirialWeight,
    make_weight,
    verify_identity,
    virial_rhs,
    virial_value,
)

__all__ = [
    "__version__",
    "DataFamily", "OnePassReport", "ScenarioTable", "ThresholdResult",
    "ejection_survey", "make_initial_data", "make_modulation_hooks",
    "make_virial_hooks", "one_pass_check", "run_direction",
    "run_scenario_scan", "threshold_shoot",
    "EvolutionConfig", "FateThresholds", "Trajectory", "classify_fate",
    "evolve", "evolve_backward",
    "FunctionalReport", "evaluate", "verify_radial_sobolev",
    "GroundState", "q_prime", "scale", "solve_ground_state",
    "EjectionFit", "ModulationConstants", "ModulationState",
    "calibrate_constants", "decompose", "distance_dQ", "energy_norm",
    "fit_ejection", "sign_S",
    "RadialField", "RadialGrid", "make_grid",
    "GapScanReport", "LinearizedPair", "MatrixHamiltonian", "SpectralData",
    "build_linearized", "build_matrix_hamiltonian", "gap_scan",
    "solve_unstable_mode",
    "VirialWeight", "make_weight", "verify_identity", "virial_rhs",
    "virial_value",
]
