"""Gradient of the discretized cost with respect to the node envelopes.

The propagator applies exp(-i H_j dt) on step j with H_j built from the
midpoint envelopes, so dK/dOmega_i collects half of the step derivative on
either side of node i. Step derivatives use the exact Frechet derivative of
the matrix exponential in the eigenbasis of H_j, paired with the discrete
adjoint; to leading order in dt this is

    g(t) = -[2 alpha(t) (Omega - Omega_ref) + Im(<chi| coupling |psi>)] dt

with the pump coupling b1* a2 + b2* a1 and the Stokes one b2* a3 + b3* a2.
"""
from __future__ import annotations

import numpy as np

from ..dynamics import RESONANCE, ControlField, Detunings, Trajectory
from ..objective import PenaltyConfig

# dH/dOmega for pump and Stokes
_PUMP_COUPLING = np.array([[0, -0.5, 0], [-0.5, 0, 0], [0, 0, 0]])
_STOKES_COUPLING = np.array([[0, 0, 0], [0, 0, -0.5], [0, -0.5, 0]])


def _step_hamiltonians(field: ControlField, detunings: Detunings) -> np.ndarray:
    pm = 0.5 * (field.pump[1:] + field.pump[:-1])
    sm = 0.5 * (field.stokes[1:] + field.stokes[:-1])
    h = np.zeros((pm.size, 3, 3))
    h[:, 0, 1] = h[:, 1, 0] = -0.5 * pm
    h[:, 1, 2] = h[:, 2, 1] = -0.5 * sm
    h[:, 1, 1] = -detunings.pump
    h[:, 2, 2] = -(detunings.pump - detunings.stokes)
    return h


def _step_sensitivities(field, state_traj, costate_traj, beta, detunings):
    """2 Re <lambda_j| dU_j/dOmega |psi_{j-1}> for each step j, per channel."""
    dt = field.grid.step
    evals, vecs = np.linalg.eigh(_step_hamiltonians(field, detunings))
    # divided differences of exp(-i lambda dt), stable through degeneracies
    lk, ll = evals[:, :, None], evals[:, None, :]
    gamma = (-1j * dt * np.exp(-0.5j * (lk + ll) * dt)
             * np.sinc((lk - ll) * dt / (2 * np.pi)))

    psi = state_traj.states
    lam = costate_traj.states[1:].copy()
    # costate just after each step: remove the half-step of source at the node
    lam[:, 1] -= 0.5 * beta * dt * psi[1:, 1]
    x = np.einsum("nkr,nk->nr", vecs, psi[:-1])
    y = np.einsum("nkr,nk->nr", vecs, lam)

    out = []
    for coupling in (_PUMP_COUPLING, _STOKES_COUPLING):
        a = np.einsum("nki,kl,nlj->nij", vecs, coupling, vecs)
        val = np.einsum("ni,nij,nj->n", y.conj(), gamma * a, x)
        out.append(2.0 * val.real)
    return out


def _spread_to_nodes(per_step: np.ndarray) -> np.ndarray:
    g = np.zeros(per_step.size + 1)
    g[:-1] += 0.5 * per_step
    g[1:] += 0.5 * per_step
    return g


def cost_gradient(field: ControlField, state_traj: Trajectory,
                  costate_traj: Trajectory, penalties: PenaltyConfig,
                  detunings: Detunings = RESONANCE) -> tuple[np.ndarray, np.ndarray]:
    """dK/dOmega_P(t_i) and dK/dOmega_S(t_i) at every node.

    ``costate_traj`` must be the output of ``propagate_costate_backward``
    started from ``terminal_costate`` with the same beta as ``penalties``.
    """
    grid = field.grid
    if state_traj.grid != grid or costate_traj.grid != grid:
        raise ValueError("field and trajectories live on different grids")
    sens_p, sens_s = _step_sensitivities(field, state_traj, costate_traj,
                                         penalties.beta, detunings)
    weight = 2.0 * penalties.alpha(grid) * grid.trapezoid_weights()
    g_p = _spread_to_nodes(sens_p) - weight * (field.pump - field.pump_ref)
    g_s = _spread_to_nodes(sens_s) - weight * (field.stokes - field.stokes_ref)
    return g_p, g_s
