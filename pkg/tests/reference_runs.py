"""Full-length optimizations at the reference parameter sets.

Each run is executed at most once per process and shared by every test
module that needs it.
"""
from __future__ import annotations

import time
from functools import lru_cache

from lambda_oct.runner import RunConfig
from lambda_oct.optimizers import optimize
from lambda_oct.scenarios import gaussian_guess

PT, MC = "population-transfer", "max-coherence"
CG, ZR, KR = "conjugate-gradient", "zhu-rabitz", "krotov"
PREV = "previous-iterate"

SETTINGS = {
    # name: (scenario, method, reference_mode, alpha0, beta)
    "cg-free": (PT, CG, "zero", 0.01, 0.0),
    "zr-free": (PT, ZR, "zero", 0.01, 0.0),
    "krotov-free": (PT, KR, "zero", 0.01, 0.0),
    "krotov-prev-free": (PT, KR, PREV, 1.0, 0.0),
    "cg-penalty": (PT, CG, "zero", 5e-5, 1.0),
    "zr-penalty": (PT, ZR, "zero", 5e-4, 1.8),
    "krotov-penalty": (PT, KR, "zero", 0.005, 0.2),
    "krotov-prev-penalty": (PT, KR, PREV, 0.05, 0.2),
    "cg-coherence": (MC, CG, "zero", 2.5e-4, 0.2),
    "zr-coherence": (MC, ZR, "zero", 5e-4, 1.8),
    "krotov-prev-coherence": (MC, KR, PREV, 0.1, 0.2),
}


def config(name: str, **overrides) -> RunConfig:
    scenario, method, ref, alpha0, beta = SETTINGS[name]
    return RunConfig(scenario=scenario, method=method, reference_mode=ref,
                     alpha0=alpha0, beta=beta, label=name, **overrides)


@lru_cache(maxsize=None)
def run(name: str):
    """(OptimizationResult, wall seconds) at the default 2000-step grid."""
    cfg = config(name)
    scenario = cfg.scenario_obj()
    start = time.perf_counter()
    result = optimize(gaussian_guess(scenario), scenario, cfg.optimizer_config())
    return result, time.perf_counter() - start
