"""gradchain: multi-neighbor spring chains that converge to higher-gradient
continua, with synthesis, dynamics, and mesh-refinement measurement tools."""

from ._backend import BACKEND, HAVE_NUMBA, backend_name
from .continuum import (FineTrajectory, SpectralSolution, discrete_dispersion_omega,
                        dispersion_omega, eval_reference, fine_grid_oracle, spectral_solve)
from .convergence import (ConvergenceReport, DeviationWeights, RowResult, ScenarioInfo,
                          default_thresholds, detect_scenario, deviation_W, estimate_order,
                          evaluate_verdicts, scenario_by_name, sweep)
from .dynamics import (EnergyBreakdown, SimState, discrete_mode_frequencies, energy,
                       exact_linear_propagate, run_verlet, stable_dt, step_verlet, total_force)
from .errors import (ConfigError, DivergenceError, GradchainError, InsufficientDataError,
                     LatticeMismatchError, UnsupportedModelError, ValidationError)
from .lattice import (LatticeField, dalpha, dminus, dplus, eps_norm, inner, laplacian,
                      sample_function, sample_initial)
from .model import (InitialData, ModelSpec, PolynomialR, ValidationReport, compute_kappa,
                    eval_initial, reduce_quadratic, validate_model)
from .selftest import run_all as run_selftest
from .synthesis import (RealizabilityReport, StiffnessNetwork, assemble_stiffness,
                        force_from_network, laplacian_power_coeffs, netlist_rows,
                        network_energy, operator_force, verify_realizability)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "BACKEND", "HAVE_NUMBA", "backend_name",
    "GradchainError", "ValidationError", "ConfigError", "LatticeMismatchError",
    "UnsupportedModelError", "DivergenceError", "InsufficientDataError",
    "PolynomialR", "InitialData", "ModelSpec", "ValidationReport",
    "reduce_quadratic", "compute_kappa", "validate_model", "eval_initial",
    "LatticeField", "dplus", "dminus", "laplacian", "dalpha",
    "sample_function", "sample_initial", "inner", "eps_norm",
    "laplacian_power_coeffs", "StiffnessNetwork", "assemble_stiffness",
    "force_from_network", "network_energy", "netlist_rows",
    "RealizabilityReport", "verify_realizability", "operator_force",
    "SimState", "EnergyBreakdown", "total_force", "stable_dt", "run_verlet",
    "step_verlet", "discrete_mode_frequencies", "exact_linear_propagate", "energy",
    "dispersion_omega", "discrete_dispersion_omega", "SpectralSolution",
    "spectral_solve", "eval_reference", "FineTrajectory", "fine_grid_oracle",
    "DeviationWeights", "ScenarioInfo", "detect_scenario", "scenario_by_name",
    "deviation_W", "estimate_order", "RowResult", "ConvergenceReport", "sweep",
    "default_thresholds", "evaluate_verdicts",
    "run_selftest",
]
