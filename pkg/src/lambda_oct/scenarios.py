"""The two control problems: full transfer 1 -> 3, and the maximally
coherent 50/50 superposition of levels 1 and 3."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import RESONANCE, ControlField, Detunings, TimeGrid

POPULATION_TRANSFER = "population-transfer"
MAX_COHERENCE = "max-coherence"
SCENARIO_NAMES = (POPULATION_TRANSFER, MAX_COHERENCE)


@dataclass(frozen=True)
class GaussianGuess:
    amplitude: float = 1.0
    center: float = 5.0
    width: float = 1.0

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError(f"guess width must be positive, got {self.width}")


@dataclass(frozen=True, eq=False)
class Scenario:
    name: str
    initial_state: np.ndarray
    target: np.ndarray
    grid: TimeGrid
    guess: GaussianGuess = field(default_factory=GaussianGuess)
    detunings: Detunings = RESONANCE


def make_scenario(name: str, target_time: float = 10.0, num_steps: int = 2000,
                  guess: GaussianGuess | None = None,
                  detunings: Detunings = RESONANCE) -> Scenario:
    initial = np.array([1, 0, 0], dtype=complex)
    if name == POPULATION_TRANSFER:
        target = np.array([0, 0, 1], dtype=complex)
    elif name == MAX_COHERENCE:
        # same sign as the dark state at equal pump and Stokes amplitudes
        target = np.array([1, 0, -1], dtype=complex) / np.sqrt(2)
    else:
        raise ValueError(f"unknown scenario {name!r}; expected one of {SCENARIO_NAMES}")
    if guess is None:
        guess = GaussianGuess(center=0.5 * target_time)
    return Scenario(name, initial, target, TimeGrid(target_time, num_steps),
                    guess, detunings)


def gaussian_guess(scenario: Scenario) -> ControlField:
    """Identical Gaussian pump and Stokes envelopes, zero reference."""
    g = scenario.guess
    t = scenario.grid.nodes
    env = g.amplitude * np.exp(-((t - g.center) ** 2) / (2 * g.width**2))
    return ControlField(scenario.grid, env, env.copy())


INTUITIVE = "intuitive"
COUNTERINTUITIVE = "counterintuitive"
SIMULTANEOUS = "simultaneous"


def peak_times(field: ControlField) -> tuple[float, float]:
    """(pump, stokes) times of maximum |envelope|; first node on ties."""
    t = field.grid.nodes
    return float(t[np.argmax(np.abs(field.pump))]), float(t[np.argmax(np.abs(field.stokes))])


def classify_mechanism(field, width: float = 1.0,
                       tail_fraction: float = 0.1, switch_off_fraction: float = 0.25,
                       ratio_tol: float = 0.1) -> dict:
    """Pulse ordering from peak times, plus a half-STIRAP flag.

    Ordering is ``simultaneous`` when the peaks are within ``0.1 * width``.
    Half-STIRAP means Stokes first and a common switch-off: after the later
    peak, wherever both envelopes have decayed to between ``tail_fraction``
    and ``switch_off_fraction`` of their peaks, |Omega_P / Omega_S - 1| must
    stay below ``ratio_tol``. Classic STIRAP fails this because the Stokes
    pulse is gone while the pump is still on.

    Accepts a ControlField or anything with a ``final_field`` attribute.
    """
    field = getattr(field, "final_field", field)
    pump, stokes = np.abs(field.pump), np.abs(field.stokes)
    pmax, smax = pump.max(), stokes.max()
    if pmax == 0 or smax == 0:
        raise ValueError("cannot classify a field with an all-zero envelope")
    scale = max(pmax, smax)
    if pmax < 1e-3 * scale or smax < 1e-3 * scale:
        raise ValueError("one envelope is negligible; ordering is undefined")

    t_pump, t_stokes = peak_times(field)
    if abs(t_pump - t_stokes) <= 0.1 * width:
        ordering = SIMULTANEOUS
    elif t_stokes < t_pump:
        ordering = COUNTERINTUITIVE
    else:
        ordering = INTUITIVE

    half = False
    if ordering == COUNTERINTUITIVE:
        t = field.grid.nodes

        def decayed(env, peak):
            return (env > tail_fraction * peak) & (env <= switch_off_fraction * peak)

        window = (t > max(t_pump, t_stokes)) & decayed(pump, pmax) & decayed(stokes, smax)
        if window.sum() >= 2:
            ratio = field.pump[window] / field.stokes[window]
            half = bool(np.all(np.abs(ratio - 1.0) < ratio_tol))
    return {"ordering": ordering, "half_stirap": half,
            "pump_peak_time": t_pump, "stokes_peak_time": t_stokes}
