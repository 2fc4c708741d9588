"""Hot propagation kernels: numba-jitted by default, pure numpy on demand.

Set the environment variable TDSPEC_PURE_NUMPY=1 before import to select the
pure-numpy fallback (useful for debugging and for the benchmark comparison in
benchmarks/bench_kernels.py). Both paths implement the same fixed-step RK4
integration of the Lindblad generator with a gated-cosine drive.
"""

from __future__ import annotations

import math
import os

import numpy as np

_FLAG = os.environ.get("TDSPEC_PURE_NUMPY", "0").strip().lower()
PURE_NUMPY = _FLAG in ("1", "true", "yes")

if not PURE_NUMPY:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a hard dependency
        PURE_NUMPY = True

# Re-hermitize the state every RESYM_EVERY steps to damp floating-point drift.
RESYM_EVERY = 1000


def _propagate_numpy(
    h0,
    pol,
    s_minus,
    s_plus,
    spsm,
    gamma,
    amp,
    omega,
    pulse_end,
    dt,
    n_steps,
    stride,
    rho,
    pop_out,
    dip_out,
    record_dipole,
):
    """Vectorized reference path. All operator inputs in rad/s; dt, times in s.

    Records Tr(S+ S- rho) (and optionally Tr(P rho)) every `stride` steps,
    including the initial and final states. Mutates `rho` in place and
    returns it.
    """

    def rhs(state, e_field):
        h = h0 - e_field * pol
        comm = h @ state - state @ h
        diss = gamma * (
            2.0 * (s_minus @ state @ s_plus) - spsm @ state - state @ spsm
        )
        return -1j * comm + diss

    def field(t):
        if t < pulse_end:
            return amp * math.cos(omega * t)
        return 0.0

    r = 0
    for s in range(n_steps):
        if s % stride == 0:
            pop_out[r] = np.einsum("ij,ji->", spsm, rho).real
            if record_dipole:
                dip_out[r] = np.einsum("ij,ji->", pol, rho).real
            r += 1
        t = s * dt
        e1 = field(t)
        e2 = field(t + 0.5 * dt)
        e3 = field(t + dt)
        k1 = rhs(rho, e1)
        k2 = rhs(rho + (0.5 * dt) * k1, e2)
        k3 = rhs(rho + (0.5 * dt) * k2, e2)
        k4 = rhs(rho + dt * k3, e3)
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if (s + 1) % RESYM_EVERY == 0:
            rho[:] = 0.5 * (rho + rho.conj().T)
    pop_out[r] = np.einsum("ij,ji->", spsm, rho).real
    if record_dipole:
        dip_out[r] = np.einsum("ij,ji->", pol, rho).real
    return rho


def _propagate_loops(
    h0,
    pol,
    s_minus,
    s_plus,
    spsm,
    gamma,
    amp,
    omega,
    pulse_end,
    dt,
    n_steps,
    stride,
    rho,
    pop_out,
    dip_out,
    record_dipole,
):
    d = rho.shape[0]
    k1 = np.empty((d, d), np.complex128)
    k2 = np.empty((d, d), np.complex128)
    k3 = np.empty((d, d), np.complex128)
    k4 = np.empty((d, d), np.complex128)
    tmp = np.empty((d, d), np.complex128)
    h = np.empty((d, d), np.complex128)
    r = 0
    for s in range(n_steps):
        if s % stride == 0:
            acc = 0.0
            for i in range(d):
                for j in range(d):
                    acc += (spsm[i, j] * rho[j, i]).real
            pop_out[r] = acc
            if record_dipole:
                acc = 0.0
                for i in range(d):
                    for j in range(d):
                        acc += (pol[i, j] * rho[j, i]).real
                dip_out[r] = acc
            r += 1
        t = s * dt
        e1 = amp * math.cos(omega * t) if t < pulse_end else 0.0
        th = t + 0.5 * dt
        e2 = amp * math.cos(omega * th) if th < pulse_end else 0.0
        t3 = t + dt
        e3 = amp * math.cos(omega * t3) if t3 < pulse_end else 0.0

        # k1
        for i in range(d):
            for j in range(d):
                h[i, j] = h0[i, j] - e1 * pol[i, j]
        _rhs_into(h, rho, s_minus, s_plus, spsm, gamma, k1)
        # k2
        for i in range(d):
            for j in range(d):
                tmp[i, j] = rho[i, j] + (0.5 * dt) * k1[i, j]
                h[i, j] = h0[i, j] - e2 * pol[i, j]
        _rhs_into(h, tmp, s_minus, s_plus, spsm, gamma, k2)
        # k3 (same field as k2)
        for i in range(d):
            for j in range(d):
                tmp[i, j] = rho[i, j] + (0.5 * dt) * k2[i, j]
        _rhs_into(h, tmp, s_minus, s_plus, spsm, gamma, k3)
        # k4
        for i in range(d):
            for j in range(d):
                tmp[i, j] = rho[i, j] + dt * k3[i, j]
                h[i, j] = h0[i, j] - e3 * pol[i, j]
        _rhs_into(h, tmp, s_minus, s_plus, spsm, gamma, k4)

        for i in range(d):
            for j in range(d):
                rho[i, j] += (dt / 6.0) * (
                    k1[i, j] + 2.0 * k2[i, j] + 2.0 * k3[i, j] + k4[i, j]
                )
        if (s + 1) % RESYM_EVERY == 0:
            for i in range(d):
                for j in range(i, d):
                    v = 0.5 * (rho[i, j] + np.conj(rho[j, i]))
                    rho[i, j] = v
                    rho[j, i] = np.conj(v)
    acc = 0.0
    for i in range(d):
        for j in range(d):
            acc += (spsm[i, j] * rho[j, i]).real
    pop_out[r] = acc
    if record_dipole:
        acc = 0.0
        for i in range(d):
            for j in range(d):
                acc += (pol[i, j] * rho[j, i]).real
        dip_out[r] = acc
    return rho


def _rhs_into_py(h, state, s_minus, s_plus, spsm, gamma, out):
    d = state.shape[0]
    hr = h @ state
    rh = state @ h
    em = (s_minus @ state) @ s_plus
    ab = spsm @ state
    ba = state @ spsm
    for i in range(d):
        for j in range(d):
            out[i, j] = -1j * (hr[i, j] - rh[i, j]) + gamma * (
                2.0 * em[i, j] - ab[i, j] - ba[i, j]
            )


if PURE_NUMPY:
    _rhs_into = _rhs_into_py
    propagate = _propagate_numpy
else:
    _rhs_into = njit(cache=True)(_rhs_into_py)
    propagate = njit(cache=True)(_propagate_loops)
