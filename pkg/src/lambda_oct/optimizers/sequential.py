"""Zhu-Rabitz and Krotov iterations.

Both replace the field by the stationarity condition

    Omega(t) = Omega_ref(t) - 1/(2 alpha(t)) Im[coupling(chi, psi)]

evaluated while the state is propagated, so every time step feeds back into
the next. Krotov does so on the forward sweep only (the costate is propagated
with the old field); Zhu-Rabitz also builds a provisional field on the
backward sweep from the stored forward history.
"""
from __future__ import annotations

import logging

from .. import _kernels
from ..dynamics import ControlField, Trajectory, propagate_costate_backward
from ..objective import evaluate_cost, terminal_costate
from ..scenarios import Scenario
from .base import (KROTOV, REF_PREVIOUS, ZHU_RABITZ, OptimizationResult,
                   OptimizerConfig, evaluate, initial_reference, make_record)

log = logging.getLogger(__name__)


def _iterate(initial_field: ControlField, scenario: Scenario,
             config: OptimizerConfig, method: str) -> OptimizationResult:
    if config.method != method:
        raise ValueError(f"config is for {config.method!r}, not {method!r}")
    pen = config.penalties
    det = scenario.detunings
    dp, ds = float(det.pump), float(det.stokes)
    grid = initial_field.grid
    dt = grid.step
    gain = 0.5 / pen.alpha(grid)

    field = initial_reference(initial_field, config.reference_mode)
    traj, cost = evaluate(field, scenario, pen)
    records = []
    converged, message = False, "iteration limit reached"
    for k in range(1, config.max_iterations + 1):
        records.append(make_record(k, cost, traj))
        # the guess is not an output of the update map, so the first change
        # (guess -> first update) is not a convergence signal
        if k >= 3 and records[-1].cost.total - records[-2].cost.total <= config.gamma:
            converged, message = True, "cost change below threshold"
            break
        if k == config.max_iterations:
            break

        if config.reference_mode == REF_PREVIOUS:
            ref_p, ref_s = field.pump, field.stokes
        else:
            ref_p, ref_s = field.pump_ref, field.stokes_ref

        chi_final = terminal_costate(traj.final, scenario.target)
        if method == ZHU_RABITZ:
            chi, _, _, failed = _kernels.propagate_back_feedback(
                chi_final, traj.states, ref_p, ref_s, gain, dp, ds, dt, pen.beta)
            if failed:
                log.warning("backward sweep %d: field equation unsolved at %d nodes", k, failed)
        else:
            chi = propagate_costate_backward(chi_final, field, det, traj, pen.beta).states
        psi, pump, stokes, failed = _kernels.propagate_feedback(
            scenario.initial_state, chi, ref_p, ref_s, gain, dp, ds, dt)
        if failed:
            log.warning("forward sweep %d: field equation unsolved at %d nodes", k, failed)
        field = ControlField(grid, pump, stokes, ref_p, ref_s)
        traj = Trajectory(grid, psi)
        cost = evaluate_cost(field, traj, scenario.target, pen)
        log.debug("%s %d: K=%.8f P=%.6f", method, k, cost.total, cost.fidelity)

    return OptimizationResult(method, field, traj, records, converged, message)


def run_zhu_rabitz(initial_field: ControlField, scenario: Scenario,
                   config: OptimizerConfig) -> OptimizationResult:
    return _iterate(initial_field, scenario, config, ZHU_RABITZ)


def run_krotov(initial_field: ControlField, scenario: Scenario,
               config: OptimizerConfig) -> OptimizationResult:
    """Krotov sweeps; with ``reference_mode="previous-iterate"`` each update
    is measured against (and penalized relative to) the preceding field."""
    return _iterate(initial_field, scenario, config, KROTOV)
