"""Polak-Ribiere-Polyak conjugate-gradient ascent of the cost functional."""
from __future__ import annotations

import logging
from collections.abc import Callable

import numpy as np

from ..dynamics import ControlField, propagate_costate_backward
from ..objective import terminal_costate
from ..scenarios import Scenario
from .base import (CONJUGATE_GRADIENT, LineSearchConfig, OptimizationResult,
                   OptimizerConfig, evaluate, initial_reference, make_record)
from .gradient import cost_gradient

log = logging.getLogger(__name__)

_GOLDEN = 0.5 * (3.0 - np.sqrt(5.0))


def prp_direction(gradient, previous_gradient, previous_direction) -> np.ndarray:
    """d = g + zeta * d_prev, zeta = g.(g - g_prev) / |g_prev|^2, clamped at 0."""
    g = np.asarray(gradient, dtype=float)
    g_prev = np.asarray(previous_gradient, dtype=float)
    denom = float(np.dot(g_prev, g_prev))
    if denom == 0.0:
        return g.copy()
    zeta = max(float(np.dot(g, g - g_prev)) / denom, 0.0)
    return g + zeta * np.asarray(previous_direction, dtype=float)


def line_search(func: Callable[[float], float], f0: float, initial_step: float,
                config: LineSearchConfig = LineSearchConfig()) -> tuple[float, float, int]:
    """Maximize ``func`` along lambda >= 0, with ``func(0) == f0``.

    Brackets by repeated growth (or shrinking, if the first trial does not
    improve) and refines the bracket by golden section. Returns
    ``(lam, func(lam), evaluations)``; ``lam == 0`` means no improving step
    was found within the evaluation budget.
    """
    if not initial_step > 0:
        raise ValueError("initial step must be positive")
    budget = config.max_evaluations
    evals = 0

    def f(lam):
        nonlocal evals
        evals += 1
        return func(lam)

    lo, f_lo = 0.0, f0
    mid = initial_step
    f_mid = f(mid)
    if f_mid <= f0:
        # shrink toward 0 until something improves
        hi, f_hi = mid, f_mid
        while evals < budget:
            mid /= config.growth
            f_mid = f(mid)
            if f_mid > f0:
                break
            hi, f_hi = mid, f_mid
        else:
            return 0.0, f0, evals
    else:
        hi = mid * config.growth
        f_hi = f(hi)
        while f_hi > f_mid and evals < budget:
            lo, f_lo = mid, f_mid
            mid, f_mid = hi, f_hi
            hi = mid * config.growth
            f_hi = f(hi)
        if f_hi > f_mid:
            return hi, f_hi, evals

    best, f_best = mid, f_mid
    # golden section on [lo, hi], which brackets the maximum at mid
    a, b = lo, hi
    x1 = a + _GOLDEN * (b - a)
    x2 = b - _GOLDEN * (b - a)
    f1 = f_mid if x1 == mid else None
    f2 = f_mid if x2 == mid else None
    while (b - a) > config.tolerance * best and evals < budget:
        if f1 is None:
            f1 = f(x1)
        if f2 is None:
            f2 = f(x2)
        for x, fx in ((x1, f1), (x2, f2)):
            if fx > f_best:
                best, f_best = x, fx
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1, f1 = a + _GOLDEN * (b - a), None
        else:
            a, x1, f1 = x1, x2, f2
            x2, f2 = b - _GOLDEN * (b - a), None
    return best, f_best, evals


def run_conjugate_gradient(initial_field: ControlField, scenario: Scenario,
                           config: OptimizerConfig) -> OptimizationResult:
    if config.method != CONJUGATE_GRADIENT:
        raise ValueError(f"config is for {config.method!r}, not conjugate-gradient")
    pen = config.penalties
    det = scenario.detunings
    field = initial_reference(initial_field, config.reference_mode)
    n = field.grid.size
    traj, cost = evaluate(field, scenario, pen)

    records = []
    converged, message = False, "iteration limit reached"
    g_prev = d_prev = None
    step = None
    for k in range(1, config.max_iterations + 1):
        records.append(make_record(k, cost, traj))
        if k >= 2 and records[-1].cost.total - records[-2].cost.total <= config.gamma:
            converged, message = True, "cost change below threshold"
            break
        if k == config.max_iterations:
            break

        chi_final = terminal_costate(traj.final, scenario.target)
        costate = propagate_costate_backward(chi_final, field, det, traj, pen.beta)
        g = np.concatenate(cost_gradient(field, traj, costate, pen, det))
        d = g if g_prev is None else prp_direction(g, g_prev, d_prev)
        if np.dot(d, g) <= 0:
            d = g
        dmax = np.abs(d).max()
        if dmax == 0:
            converged, message = True, "zero gradient"
            break
        if step is None:
            step = 0.1 / dmax

        def along(lam, field=field, d=d):
            trial = field.with_envelopes(field.pump + lam * d[:n], field.stokes + lam * d[n:])
            return evaluate(trial, scenario, pen)[1].total

        lam, _, _ = line_search(along, cost.total, step, config.line_search)
        if lam == 0.0:
            message = "line search stalled"
            log.info("CG stalled at iteration %d (K=%.6f)", k, cost.total)
            break
        field = field.with_envelopes(field.pump + lam * d[:n], field.stokes + lam * d[n:])
        traj, cost = evaluate(field, scenario, pen)
        g_prev, d_prev, step = g, d, lam
        log.debug("CG %d: K=%.8f P=%.6f lambda=%.3g", k, cost.total, cost.fidelity, lam)

    return OptimizationResult(CONJUGATE_GRADIENT, field, traj, records, converged, message)
