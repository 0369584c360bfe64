"""Optimal control of pump/Stokes pulse pairs in a three-level Lambda system."""
from .dynamics import (ControlField, Detunings, TimeGrid, Trajectory, dark_state,
                       propagate_costate_backward, propagate_state_forward,
                       rwa_hamiltonian)
from .objective import (CostBreakdown, PenaltyConfig, ShapeFunction, coherence,
                        evaluate_cost, intermediate_population_metrics,
                        terminal_costate)
from .optimizers import (OptimizationResult, OptimizerConfig, cost_gradient,
                         optimize, run_conjugate_gradient, run_krotov,
                         run_zhu_rabitz)
from .scenarios import (GaussianGuess, Scenario, classify_mechanism,
                        gaussian_guess, make_scenario)

__version__ = "0.1.0"
