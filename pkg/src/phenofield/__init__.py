"""Finite-element simulator for nutrient-limited tumour growth with a
phenotype-structured cell population.

The model couples a conserved phase field for the tumour/healthy mixture, a
per-point probability distribution over a continuous trait that sets local
proliferation, death, and consumption rates, and a diffusing nutrient.  The
phase pair advances by a gradient-stable convex-splitting scheme, the trait
distribution by an explicit selection-mutation update that conserves its unit
mass identically, and the nutrient by backward Euler.
"""

__version__ = "0.1.0"

from .assembly import (Operators, assemble_mass, assemble_nonlinear_cubic,
                       assemble_stiffness, assemble_weighted_mass, build_operators,
                       cubic_load_vector, double_well_integral)
from .config import (ConfigError, IcF, IcPhi, OutputPolicy, SimulationConfig,
                     ValidationReport, config_to_text, default_config, parse_config,
                     validate_assumptions)
from .driver import (Problem, RunResult, SimulationAbort, SimulationState, advance,
                     build_initial_state, run, setup_problem)
from .fields import (ChState, SolverFailure, ch_step, chemical_potential_init,
                     sigma_steady_init, sigma_step)
from .functions import ModelFunctions, default_model_functions
from .mesh import Mesh, ScalarField, build_uniform_mesh, interpolate
from .observables import (ObservableRecord, energy, nearest_node, observable_record,
                          tumour_measure)
from .phenotype import (KernelMatrix, PhenotypeField, PhenotypeGrid, build_grid,
                        build_kernel_matrix, initial_distribution, mean_and_variance,
                        moment, phenotype_step)
from .solvers import (NewtonError, SolveReport, SolverBreakdownError, SolverControls,
                      bicgstab_solve, cg_solve, newton_solve)

__all__ = [
    "Operators", "assemble_mass", "assemble_nonlinear_cubic", "assemble_stiffness",
    "assemble_weighted_mass", "build_operators", "cubic_load_vector",
    "double_well_integral",
    "ConfigError", "IcF", "IcPhi", "OutputPolicy", "SimulationConfig",
    "ValidationReport", "config_to_text", "default_config", "parse_config",
    "validate_assumptions",
    "Problem", "RunResult", "SimulationAbort", "SimulationState", "advance",
    "build_initial_state", "run", "setup_problem",
    "ChState", "SolverFailure", "ch_step", "chemical_potential_init",
    "sigma_steady_init", "sigma_step",
    "ModelFunctions", "default_model_functions",
    "Mesh", "ScalarField", "build_uniform_mesh", "interpolate",
    "ObservableRecord", "energy", "nearest_node", "observable_record",
    "tumour_measure",
    "KernelMatrix", "PhenotypeField", "PhenotypeGrid", "build_grid",
    "build_kernel_matrix", "initial_distribution", "mean_and_variance", "moment",
    "phenotype_step",
    "NewtonError", "SolveReport", "SolverBreakdownError", "SolverControls",
    "bicgstab_solve", "cg_solve", "newton_solve",
]
