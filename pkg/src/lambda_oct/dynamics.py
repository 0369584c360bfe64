"""Rotating-wave Lambda system: Hamiltonian, state and costate propagation.

Units: hbar = 1, time in pulse widths tau0, Rabi frequencies and detunings
in 1/tau0. Level 1 is the initially populated ground state, level 2 the
excited intermediate state, level 3 the target ground state.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _kernels

NORM_TOL = 1e-6


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_i = i * step on [0, target_time]."""

    target_time: float
    num_steps: int

    def __post_init__(self):
        if not np.isfinite(self.target_time) or self.target_time <= 0:
            raise ValueError(f"target_time must be positive, got {self.target_time}")
        if int(self.num_steps) != self.num_steps or self.num_steps < 1:
            raise ValueError(f"num_steps must be a positive integer, got {self.num_steps}")

    @property
    def step(self) -> float:
        return self.target_time / self.num_steps

    @cached_property
    def nodes(self) -> np.ndarray:
        t = np.arange(self.num_steps + 1) * self.step
        t[-1] = self.target_time
        t.flags.writeable = False
        return t

    @property
    def size(self) -> int:
        return self.num_steps + 1

    def trapezoid_weights(self) -> np.ndarray:
        w = np.full(self.size, self.step)
        w[0] = w[-1] = 0.5 * self.step
        return w

    def integrate(self, values) -> float:
        return float(np.dot(self.trapezoid_weights(), values))


@dataclass(frozen=True)
class Detunings:
    pump: float = 0.0
    stokes: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.pump) and np.isfinite(self.stokes)):
            raise ValueError("detunings must be finite")

    @property
    def resonant(self) -> bool:
        return self.pump == 0.0 and self.stokes == 0.0


RESONANCE = Detunings()


def _node_array(values, grid: TimeGrid, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim == 0:
        arr = np.full(grid.size, float(arr))
    if arr.shape != (grid.size,):
        raise ValueError(f"{name} must have {grid.size} samples, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class ControlField:
    """Real pump/Stokes Rabi envelopes sampled on the grid nodes, plus the
    reference envelopes the field-energy penalty is measured against."""

    grid: TimeGrid
    pump: np.ndarray
    stokes: np.ndarray
    pump_ref: np.ndarray = None
    stokes_ref: np.ndarray = None

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "pump", _node_array(self.pump, self.grid, "pump"))
        set_(self, "stokes", _node_array(self.stokes, self.grid, "stokes"))
        for name in ("pump_ref", "stokes_ref"):
            value = getattr(self, name)
            set_(self, name, _node_array(0.0 if value is None else value, self.grid, name))

    def with_envelopes(self, pump, stokes) -> ControlField:
        return ControlField(self.grid, pump, stokes, self.pump_ref, self.stokes_ref)

    def with_reference(self, pump_ref, stokes_ref) -> ControlField:
        return ControlField(self.grid, self.pump, self.stokes, pump_ref, stokes_ref)

    def as_reference(self) -> tuple[np.ndarray, np.ndarray]:
        return self.pump, self.stokes


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Amplitude history, shape (N+1, 3), one row per grid node."""

    grid: TimeGrid
    states: np.ndarray

    def __post_init__(self):
        states = np.asarray(self.states, dtype=complex)
        if states.shape != (self.grid.size, 3):
            raise ValueError(f"states must have shape {(self.grid.size, 3)}, got {states.shape}")
        states.flags.writeable = False
        object.__setattr__(self, "states", states)

    def __len__(self):
        return self.grid.size

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.states) ** 2

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.states, axis=1)


def as_state(amplitudes, *, normalized: bool = True) -> np.ndarray:
    """Validate a 3-amplitude vector; physical states must have unit norm."""
    v = np.array(amplitudes, dtype=complex).reshape(-1)
    if v.shape != (3,):
        raise ValueError(f"a state has 3 amplitudes, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValueError("state amplitudes must be finite")
    if normalized and abs(np.linalg.norm(v) - 1.0) > NORM_TOL:
        raise ValueError(f"state is not normalized (norm {np.linalg.norm(v):.9g})")
    return v


def rwa_hamiltonian(pump_rabi: float, stokes_rabi: float,
                    detunings: Detunings = RESONANCE) -> np.ndarray:
    """Rotating-frame Hamiltonian (hbar = 1) for one pair of Rabi frequencies."""
    h = np.zeros((3, 3), dtype=complex)
    h[0, 1] = h[1, 0] = -0.5 * pump_rabi
    h[1, 2] = h[2, 1] = -0.5 * stokes_rabi
    h[1, 1] = -detunings.pump
    h[2, 2] = -(detunings.pump - detunings.stokes)
    return h


def propagate_state_forward(initial, field: ControlField,
                            detunings: Detunings = RESONANCE) -> Trajectory:
    psi0 = as_state(initial)
    states = _kernels.propagate(psi0, field.pump, field.stokes,
                                float(detunings.pump), float(detunings.stokes),
                                field.grid.step)
    return Trajectory(field.grid, states)


def propagate_costate_backward(terminal, field: ControlField,
                               detunings: Detunings = RESONANCE,
                               state_trajectory: Trajectory | None = None,
                               beta: float = 0.0) -> Trajectory:
    """Integrate the Lagrange-multiplier equation from t = T down to 0.

    The source ``beta * a2(t)`` along the intermediate level is accumulated
    with the trapezoid rule over each step, which makes the result the exact
    adjoint of the discretized cost (see ``optimizers.gradient``).
    """
    chi_final = as_state(terminal, normalized=False)
    if beta < 0:
        raise ValueError(f"beta must be non-negative, got {beta}")
    if state_trajectory is None:
        if beta != 0:
            raise ValueError("a state trajectory is required when beta > 0")
        psi = np.zeros((field.grid.size, 3), dtype=complex)
    else:
        if state_trajectory.grid != field.grid:
            raise ValueError("state trajectory and field live on different grids")
        psi = state_trajectory.states
    states = _kernels.propagate_back(chi_final, field.pump, field.stokes,
                                     float(detunings.pump), float(detunings.stokes),
                                     field.grid.step, psi, float(beta))
    return Trajectory(field.grid, states)


def dark_state(pump_rabi: float, stokes_rabi: float) -> np.ndarray:
    """Zero-energy dressed state of the resonant Hamiltonian."""
    norm = np.hypot(pump_rabi, stokes_rabi)
    if norm == 0:
        raise ValueError("dark state is undefined when both Rabi frequencies vanish")
    return np.array([stokes_rabi / norm, 0.0, -pump_rabi / norm], dtype=complex)
