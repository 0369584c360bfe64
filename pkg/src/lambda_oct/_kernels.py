"""Compiled inner loops for three-level propagation.

Everything here works on plain arrays: node-sampled pump/Stokes envelopes of
length N+1, amplitude histories of shape (N+1, 3). Each step i -> i+1 uses the
piecewise-constant Hamiltonian evaluated at the midpoint envelope values.
"""
import numpy as np
from numba import njit

# below this rotation angle the closed form switches to its Taylor series
_SMALL_ANGLE = 1e-5


@njit(cache=True)
def step_unitary(pump, stokes, pump_detuning, stokes_detuning, dt):
    """exp(-i H dt) for the rotating-frame Lambda Hamiltonian (hbar = 1)."""
    u = np.empty((3, 3), dtype=np.complex128)
    if pump_detuning == 0.0 and stokes_detuning == 0.0:
        # H = -M/2 with M^3 = W^2 M, W^2 = pump^2 + stokes^2
        w2 = pump * pump + stokes * stokes
        theta = 0.5 * dt * np.sqrt(w2)
        if theta < _SMALL_ANGLE:
            th2 = theta * theta
            c1 = 0.5 * dt * (1.0 - th2 / 6.0)
            c2 = -0.125 * dt * dt * (1.0 - th2 / 12.0)
        else:
            w = np.sqrt(w2)
            c1 = np.sin(theta) / w
            c2 = (np.cos(theta) - 1.0) / w2
        ps = pump * stokes
        u[0, 0] = 1.0 + c2 * pump * pump
        u[0, 1] = 1j * c1 * pump
        u[0, 2] = c2 * ps
        u[1, 0] = 1j * c1 * pump
        u[1, 1] = 1.0 + c2 * w2
        u[1, 2] = 1j * c1 * stokes
        u[2, 0] = c2 * ps
        u[2, 1] = 1j * c1 * stokes
        u[2, 2] = 1.0 + c2 * stokes * stokes
        return u
    h = np.zeros((3, 3))
    h[0, 1] = h[1, 0] = -0.5 * pump
    h[1, 2] = h[2, 1] = -0.5 * stokes
    h[1, 1] = -pump_detuning
    h[2, 2] = -(pump_detuning - stokes_detuning)
    evals, evecs = np.linalg.eigh(h)
    for r in range(3):
        for c in range(3):
            acc = 0.0j
            for k in range(3):
                acc += evecs[r, k] * np.exp(-1j * evals[k] * dt) * evecs[c, k]
            u[r, c] = acc
    return u


@njit(cache=True)
def _apply(u, v, out):
    for r in range(3):
        out[r] = u[r, 0] * v[0] + u[r, 1] * v[1] + u[r, 2] * v[2]


@njit(cache=True)
def _apply_adjoint(u, v, out):
    for r in range(3):
        out[r] = (np.conj(u[0, r]) * v[0] + np.conj(u[1, r]) * v[1]
                  + np.conj(u[2, r]) * v[2])


@njit(cache=True)
def _pump_overlap(b, a):
    # Im[b1* a2 + b2* a1]
    return (np.conj(b[0]) * a[1] + np.conj(b[1]) * a[0]).imag


@njit(cache=True)
def _stokes_overlap(b, a):
    # Im[b2* a3 + b3* a2]
    return (np.conj(b[1]) * a[2] + np.conj(b[2]) * a[1]).imag


@njit(cache=True)
def propagate(psi0, pump, stokes, pump_detuning, stokes_detuning, dt):
    n = pump.shape[0]
    out = np.empty((n, 3), dtype=np.complex128)
    out[0] = psi0
    for i in range(n - 1):
        u = step_unitary(0.5 * (pump[i] + pump[i + 1]),
                         0.5 * (stokes[i] + stokes[i + 1]),
                         pump_detuning, stokes_detuning, dt)
        _apply(u, out[i], out[i + 1])
    return out


@njit(cache=True)
def propagate_back(chi_final, pump, stokes, pump_detuning, stokes_detuning,
                   dt, psi, beta):
    """Costate history; source beta*a2 enters by trapezoid accumulation."""
    n = pump.shape[0]
    out = np.empty((n, 3), dtype=np.complex128)
    out[n - 1] = chi_final
    h = 0.5 * beta * dt
    tmp = np.empty(3, dtype=np.complex128)
    for i in range(n - 2, -1, -1):
        u = step_unitary(0.5 * (pump[i] + pump[i + 1]),
                         0.5 * (stokes[i] + stokes[i + 1]),
                         pump_detuning, stokes_detuning, dt)
        tmp[:] = out[i + 1]
        tmp[1] -= h * psi[i + 1, 1]
        _apply_adjoint(u, tmp, out[i])
        out[i, 1] -= h * psi[i, 1]
    return out


# per-node implicit field solve
_NEWTON_MAX = 40
_NEWTON_TOL = 1e-13


@njit(cache=True)
def _node_residual(p_prev, s_prev, p, s, base, fixed, forward, ref_p, ref_s,
                   g, dp, ds, dt, shift, out):
    u = step_unitary(0.5 * (p_prev + p), 0.5 * (s_prev + s), dp, ds, dt)
    if forward:
        _apply(u, base, out)
        rp = p - ref_p + g * _pump_overlap(fixed, out)
        rs = s - ref_s + g * _stokes_overlap(fixed, out)
    else:
        _apply_adjoint(u, base, out)
        out[1] -= shift
        rp = p - ref_p + g * _pump_overlap(out, fixed)
        rs = s - ref_s + g * _stokes_overlap(out, fixed)
    return rp, rs


@njit(cache=True)
def _solve_node(p_prev, s_prev, p, s, base, fixed, forward, ref_p, ref_s,
                g, dp, ds, dt, shift, out):
    """Newton solve of Omega = ref - g * Im<chi|C|psi> for one node, where the
    state (forward) or costate (backward) at that node depends on the node
    field through the step that reaches it. Returns (p, s, converged)."""
    work = np.empty(3, dtype=np.complex128)
    for _ in range(_NEWTON_MAX):
        rp, rs = _node_residual(p_prev, s_prev, p, s, base, fixed, forward,
                                ref_p, ref_s, g, dp, ds, dt, shift, out)
        if abs(rp) + abs(rs) <= _NEWTON_TOL * (1.0 + abs(p) + abs(s)):
            return p, s, True
        hp = 1e-7 * (1.0 + abs(p))
        hs = 1e-7 * (1.0 + abs(s))
        a, c = _node_residual(p_prev, s_prev, p + hp, s, base, fixed, forward,
                              ref_p, ref_s, g, dp, ds, dt, shift, work)
        b, d = _node_residual(p_prev, s_prev, p, s + hs, base, fixed, forward,
                              ref_p, ref_s, g, dp, ds, dt, shift, work)
        j11, j21 = (a - rp) / hp, (c - rs) / hp
        j12, j22 = (b - rp) / hs, (d - rs) / hs
        det = j11 * j22 - j12 * j21
        if det == 0.0:
            break
        p -= (j22 * rp - j12 * rs) / det
        s -= (j11 * rs - j21 * rp) / det
    rp, rs = _node_residual(p_prev, s_prev, p, s, base, fixed, forward,
                            ref_p, ref_s, g, dp, ds, dt, shift, out)
    return p, s, abs(rp) + abs(rs) <= 1e-8 * (1.0 + abs(p) + abs(s))


@njit(cache=True)
def propagate_feedback(psi0, chi, pump_ref, stokes_ref, gain,
                       pump_detuning, stokes_detuning, dt):
    """Forward sweep that builds the new field from chi and the evolving psi.

    The field at node i+1 satisfies the update rule with the state psi[i+1]
    it produces itself (the step i -> i+1 uses the midpoint of the node-i and
    node-(i+1) fields), so the returned history is exactly the trajectory of
    the returned field. A predictor holding the node-i field over the step
    seeds the per-node Newton solve. Also returns the number of nodes where
    the solve did not converge.
    """
    n = pump_ref.shape[0]
    psi = np.empty((n, 3), dtype=np.complex128)
    pump = np.empty(n)
    stokes = np.empty(n)
    trial = np.empty(3, dtype=np.complex128)
    failures = 0
    psi[0] = psi0
    pump[0] = pump_ref[0] - gain[0] * _pump_overlap(chi[0], psi0)
    stokes[0] = stokes_ref[0] - gain[0] * _stokes_overlap(chi[0], psi0)
    for i in range(n - 1):
        u = step_unitary(pump[i], stokes[i], pump_detuning, stokes_detuning, dt)
        _apply(u, psi[i], trial)
        p = pump_ref[i + 1] - gain[i + 1] * _pump_overlap(chi[i + 1], trial)
        s = stokes_ref[i + 1] - gain[i + 1] * _stokes_overlap(chi[i + 1], trial)
        p, s, ok = _solve_node(pump[i], stokes[i], p, s, psi[i], chi[i + 1], True,
                               pump_ref[i + 1], stokes_ref[i + 1], gain[i + 1],
                               pump_detuning, stokes_detuning, dt, 0.0, psi[i + 1])
        if not ok:
            failures += 1
        pump[i + 1] = p
        stokes[i + 1] = s
    return psi, pump, stokes, failures


@njit(cache=True)
def propagate_back_feedback(chi_final, psi, pump_ref, stokes_ref, gain,
                            pump_detuning, stokes_detuning, dt, beta):
    """Backward costate sweep driven by the field built on the fly from the
    stored forward history (mirror image of ``propagate_feedback``)."""
    n = pump_ref.shape[0]
    chi = np.empty((n, 3), dtype=np.complex128)
    pump = np.empty(n)
    stokes = np.empty(n)
    trial = np.empty(3, dtype=np.complex128)
    tmp = np.empty(3, dtype=np.complex128)
    h = 0.5 * beta * dt
    failures = 0
    last = n - 1
    chi[last] = chi_final
    pump[last] = pump_ref[last] - gain[last] * _pump_overlap(chi_final, psi[last])
    stokes[last] = (stokes_ref[last]
                    - gain[last] * _stokes_overlap(chi_final, psi[last]))
    for i in range(n - 2, -1, -1):
        tmp[:] = chi[i + 1]
        tmp[1] -= h * psi[i + 1, 1]
        u = step_unitary(pump[i + 1], stokes[i + 1],
                         pump_detuning, stokes_detuning, dt)
        _apply_adjoint(u, tmp, trial)
        trial[1] -= h * psi[i, 1]
        p = pump_ref[i] - gain[i] * _pump_overlap(trial, psi[i])
        s = stokes_ref[i] - gain[i] * _stokes_overlap(trial, psi[i])
        p, s, ok = _solve_node(pump[i + 1], stokes[i + 1], p, s, tmp, psi[i], False,
                               pump_ref[i], stokes_ref[i], gain[i],
                               pump_detuning, stokes_detuning, dt,
                               h * psi[i, 1], chi[i])
        if not ok:
            failures += 1
        pump[i] = p
        stokes[i] = s
    return chi, pump, stokes, failures
