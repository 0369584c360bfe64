"""Configuration, per-iteration records and the shared evaluation step."""
from __future__ import annotations

from dataclasses import dataclass, field


from ..dynamics import ControlField, Trajectory, propagate_state_forward
from ..objective import (CostBreakdown, PenaltyConfig, coherence, evaluate_cost,
                         intermediate_population_metrics)
from ..scenarios import Scenario, peak_times

CONJUGATE_GRADIENT = "conjugate-gradient"
ZHU_RABITZ = "zhu-rabitz"
KROTOV = "krotov"
METHODS = (CONJUGATE_GRADIENT, ZHU_RABITZ, KROTOV)

# what the field-energy penalty is measured against
REF_ZERO = "zero"
REF_FIXED_GUESS = "fixed-guess"
REF_PREVIOUS = "previous-iterate"
REFERENCE_MODES = (REF_ZERO, REF_FIXED_GUESS, REF_PREVIOUS)


@dataclass(frozen=True)
class LineSearchConfig:
    growth: float = 2.0
    max_evaluations: int = 40
    tolerance: float = 1e-3

    def __post_init__(self):
        if self.growth <= 1:
            raise ValueError("line-search growth factor must exceed 1")
        if self.max_evaluations < 3:
            raise ValueError("line search needs at least 3 evaluations")
        if not self.tolerance > 0:
            raise ValueError("line-search tolerance must be positive")


@dataclass(frozen=True)
class OptimizerConfig:
    method: str
    penalties: PenaltyConfig
    reference_mode: str = REF_ZERO
    max_iterations: int = 1000
    gamma: float = 1e-8
    line_search: LineSearchConfig = field(default_factory=LineSearchConfig)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.reference_mode not in REFERENCE_MODES:
            raise ValueError(f"unknown reference_mode {self.reference_mode!r}")
        if self.reference_mode == REF_PREVIOUS and self.method != KROTOV:
            raise ValueError("previous-iterate reference is only defined for krotov")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise ValueError("max_iterations must be a positive integer")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")


@dataclass(frozen=True)
class IterationRecord:
    index: int
    cost: CostBreakdown
    max_rho22: float

    @property
    def transition_probability(self) -> float:
        return self.cost.fidelity


@dataclass(eq=False)
class OptimizationResult:
    method: str
    final_field: ControlField
    final_trajectory: Trajectory
    records: list[IterationRecord]
    converged: bool
    message: str = ""

    @property
    def summary(self) -> dict:
        last = self.records[-1]
        t_pump, t_stokes = peak_times(self.final_field)
        return {
            "P": last.transition_probability,
            "K": last.cost.total,
            "fidelity": last.cost.fidelity,
            "field_penalty": last.cost.field_penalty,
            "state_penalty": last.cost.state_penalty,
            "max_rho22": last.max_rho22,
            "rho31_final": float(coherence(self.final_trajectory)[-1]),
            "pump_peak_time": t_pump,
            "stokes_peak_time": t_stokes,
            "iterations": len(self.records),
            "converged": self.converged,
        }


def initial_reference(field: ControlField, mode: str) -> ControlField:
    """Install the reference envelopes a run starts from."""
    if mode == REF_ZERO:
        return field.with_reference(0.0, 0.0)
    # fixed-guess keeps the guess forever; previous-iterate starts from it
    return field.with_reference(field.pump, field.stokes)


def evaluate(field: ControlField, scenario: Scenario, penalties: PenaltyConfig):
    traj = propagate_state_forward(scenario.initial_state, field, scenario.detunings)
    return traj, evaluate_cost(field, traj, scenario.target, penalties)


def make_record(index: int, cost: CostBreakdown, traj: Trajectory) -> IterationRecord:
    return IterationRecord(index, cost, intermediate_population_metrics(traj)["max_rho22"])

