"""Conjugate-gradient, Zhu-Rabitz and Krotov optimizers."""
from .base import (CONJUGATE_GRADIENT, KROTOV, METHODS, REF_FIXED_GUESS,
                   REF_PREVIOUS, REF_ZERO, REFERENCE_MODES, ZHU_RABITZ,
                   IterationRecord, LineSearchConfig, OptimizationResult,
                   OptimizerConfig)
from .conjugate_gradient import line_search, prp_direction, run_conjugate_gradient
from .gradient import cost_gradient
from .sequential import run_krotov, run_zhu_rabitz

RUNNERS = {
    CONJUGATE_GRADIENT: run_conjugate_gradient,
    ZHU_RABITZ: run_zhu_rabitz,
    KROTOV: run_krotov,
}


def optimize(initial_field, scenario, config: OptimizerConfig) -> OptimizationResult:
    return RUNNERS[config.method](initial_field, scenario, config)
