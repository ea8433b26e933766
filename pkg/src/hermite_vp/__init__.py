"""Vlasov-Poisson solver using a symmetrically-weighted Hermite expansion in
velocity, either of f itself or of its square root."""

from .errors import ConfigurationError, DomainError, SolverError
from .hermite import (HermiteParams, MomentTables, basis_table, eval_basis, eval_basis_row, moment_tables,
                      triple_product)
from .grid import (DerivativeOperator, GridConfig, apply_derivative, build_derivative, project_range,
                   solve_singular, trapezoid)
from .krylov import LinearOperatorHandle, SolveReport, gmres, jfnk_solve
from .vlasov import (Formulation, SpeciesConfig, SpectralState, VlasovPoissonSystem, advection_rhs,
                     charge_density, reconstruct_distribution, reconstruct_grid, solve_poisson)
from .integrators import Method, StepperConfig, StepStats, Trajectory, run, step_implicit_midpoint, step_rk3
from .diagnostics import (DiagnosticsRecord, analytic_drifts, compute_record, energies, fit_exponential_rate,
                          oscillation_period, particle_number, total_momentum)
from .transform import swsr_to_sw, transform_state
from .scenarios import (BeamConfig, Scenario, ScenarioConfig, build_initial_state, default_config,
                        dispersion_reference, manufactured_convergence, manufactured_reference, measure_rate,
                        simulate)
from .config import parse_config, parse_config_text

__version__ = "0.1.0"
