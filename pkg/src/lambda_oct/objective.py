"""Cost functional: overlap with the target minus field-energy and
intermediate-population penalties."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import ControlField, TimeGrid, Trajectory, as_state

SHAPE_FLOOR = 1e-4
SHAPE_KINDS = ("sine-squared", "flat", "custom-sampled")


@dataclass(frozen=True, eq=False)
class ShapeFunction:
    """Switching profile s(t); the field penalty weight is alpha0 / s(t).

    ``samples`` is only used for ``custom-sampled``; the other kinds are
    generated on whatever grid they are asked for. Values below ``floor``
    are clipped so that alpha(t) stays finite at the interval edges.
    """

    kind: str = "sine-squared"
    samples: np.ndarray | None = None
    floor: float = SHAPE_FLOOR

    def __post_init__(self):
        if self.kind not in SHAPE_KINDS:
            raise ValueError(f"unknown shape kind {self.kind!r}")
        if self.kind == "custom-sampled":
            if self.samples is None:
                raise ValueError("custom-sampled shape needs samples")
            s = np.asarray(self.samples, dtype=float)
            if np.any(~np.isfinite(s)) or np.any(s > 1) or np.any(s[1:-1] <= 0):
                raise ValueError("shape samples must lie in (0, 1] at interior nodes")
            object.__setattr__(self, "samples", s)
        if not 0 < self.floor <= 1:
            raise ValueError("shape floor must lie in (0, 1]")

    def sample(self, grid: TimeGrid) -> np.ndarray:
        if self.kind == "sine-squared":
            s = np.sin(np.pi * grid.nodes / grid.target_time) ** 2
        elif self.kind == "flat":
            s = np.ones(grid.size)
        else:
            if self.samples.shape != (grid.size,):
                raise ValueError("shape samples do not match the grid")
            s = self.samples
        return np.maximum(s, self.floor)


@dataclass(frozen=True)
class PenaltyConfig:
    alpha0: float
    beta: float = 0.0
    shape: ShapeFunction = ShapeFunction()

    def __post_init__(self):
        if not (np.isfinite(self.alpha0) and self.alpha0 > 0):
            raise ValueError(f"alpha0 must be positive, got {self.alpha0}")
        if not (np.isfinite(self.beta) and self.beta >= 0):
            raise ValueError(f"beta must be non-negative, got {self.beta}")

    def alpha(self, grid: TimeGrid) -> np.ndarray:
        """Time-dependent field penalty weight alpha0 / s(t)."""
        return self.alpha0 / self.shape.sample(grid)


@dataclass(frozen=True)
class CostBreakdown:
    fidelity: float
    field_penalty: float
    state_penalty: float

    @property
    def total(self) -> float:
        return self.fidelity - self.field_penalty - self.state_penalty


def overlap(final_state, target) -> complex:
    """<phi|psi(T)>"""
    return complex(np.vdot(target, final_state))


def field_penalty(field: ControlField, penalties: PenaltyConfig) -> float:
    grid = field.grid
    dev = (field.pump - field.pump_ref) ** 2 + (field.stokes - field.stokes_ref) ** 2
    return grid.integrate(penalties.alpha(grid) * dev)


def evaluate_cost(field: ControlField, trajectory: Trajectory, target,
                  penalties: PenaltyConfig) -> CostBreakdown:
    if trajectory.grid != field.grid:
        raise ValueError("trajectory and field live on different grids")
    phi = as_state(target)
    fidelity = min(abs(overlap(trajectory.final, phi)) ** 2, 1.0)
    rho22 = np.abs(trajectory.states[:, 1]) ** 2
    return CostBreakdown(
        fidelity=fidelity,
        field_penalty=field_penalty(field, penalties),
        state_penalty=penalties.beta * trajectory.grid.integrate(rho22),
    )


def terminal_costate(final_state, target) -> np.ndarray:
    """Terminal condition chi(T) = phi <phi|psi(T)>.

    Its inner product with a variation of psi(T) gives (half) the variation
    of the overlap |<phi|psi(T)>|^2.
    """
    phi = as_state(target)
    psi = as_state(final_state, normalized=False)
    return overlap(psi, phi) * phi


def intermediate_population_metrics(trajectory: Trajectory) -> dict[str, float]:
    rho22 = np.abs(trajectory.states[:, 1]) ** 2
    return {
        "max_rho22": float(rho22.max()),
        "integral_rho22": trajectory.grid.integrate(rho22),
    }


def coherence(trajectory: Trajectory) -> np.ndarray:
    """Raman coherence |a3* a1| at every node."""
    s = trajectory.states
    return np.abs(np.conj(s[:, 2]) * s[:, 0])
