"""Density-matrix propagation under collective decay with a gated drive."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import NumericsError
from .model import (
    TWO_PI,
    DrivePulse,
    EnsembleSpec,
    OperatorMatrix,
    build_collective_jump_operators,
    build_polarization_operator,
    build_static_hamiltonian,
)

# Default time step is 1/(DT_DIVISOR * carrier); anything coarser than
# 1/(DT_MIN_DIVISOR * carrier) is rejected for a driven evolution.
DT_DIVISOR = 50
DT_MIN_DIVISOR = 20

# Default observable recording interval in seconds.
RECORD_INTERVAL = 0.1e-9


@dataclass
class StateReport:
    trace_error: float
    hermiticity_error: float
    min_eigenvalue: float


@dataclass
class EvolutionResult:
    """Uniformly sampled observables plus the final state."""

    times: np.ndarray
    population: np.ndarray
    dipole: np.ndarray | None
    final_state: np.ndarray

    def pulse_off_index(self, duration: float) -> int:
        """Index of the output sample closest to the end of the pulse."""
        dt_out = self.times[1] - self.times[0]
        return int(round(duration / dt_out))


def validate_state(rho: np.ndarray) -> StateReport:
    """Trace, hermiticity and positivity diagnostics for a density matrix."""
    rho = np.asarray(rho, dtype=np.complex128)
    trace_error = abs(np.trace(rho).real - 1.0)
    herm = np.abs(rho - rho.conj().T).max()
    sym = 0.5 * (rho + rho.conj().T)
    min_eig = float(np.linalg.eigvalsh(sym).min())
    return StateReport(float(trace_error), float(herm), min_eig)


def ground_state(spec: EnsembleSpec) -> np.ndarray:
    """Density matrix of the lowest eigenstate of the static Hamiltonian."""
    h0 = build_static_hamiltonian(spec).entries
    _, vecs = np.linalg.eigh(h0)
    g = vecs[:, 0]
    return np.outer(g, g.conj())


def lindblad_rhs(
    rho: np.ndarray,
    h: OperatorMatrix | np.ndarray,
    s_minus: OperatorMatrix | np.ndarray,
    s_plus: OperatorMatrix | np.ndarray,
    gamma: float,
) -> np.ndarray:
    """-i[H, rho] + Gamma (2 S- rho S+ - S+S- rho - rho S+S-), Gamma in Hz."""
    h = h.entries if isinstance(h, OperatorMatrix) else np.asarray(h)
    sm = s_minus.entries if isinstance(s_minus, OperatorMatrix) else np.asarray(s_minus)
    sp = s_plus.entries if isinstance(s_plus, OperatorMatrix) else np.asarray(s_plus)
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.shape != h.shape or sm.shape != h.shape:
        raise NumericsError("operator and state dimensions disagree")
    g = TWO_PI * gamma
    spsm = sp @ sm
    return -1j * (h @ rho - rho @ h) + g * (
        2.0 * (sm @ rho @ sp) - spsm @ rho - rho @ spsm
    )


def default_dt(spec: EnsembleSpec, pulse: DrivePulse | None) -> float:
    if pulse is not None:
        return 1.0 / (DT_DIVISOR * pulse.carrier)
    fastest = max(math.hypot(d.epsilon, d.delta) for d in spec.defects)
    return 1.0 / (DT_DIVISOR * fastest)


def evolve(
    spec: EnsembleSpec,
    pulse: DrivePulse | None,
    t_end: float,
    dt: float | None = None,
    rho0: np.ndarray | None = None,
    record_stride: int | None = None,
    record_dipole: bool = False,
) -> EvolutionResult:
    """Fixed-step RK4 propagation of the full time-dependent generator.

    The drive is a lab-frame gated cosine; dt must resolve the carrier
    (dt <= 1/(20*carrier)) whenever the pulse amplitude is nonzero. The
    initial state defaults to the ground state of the static Hamiltonian.
    """
    if dt is None:
        dt = default_dt(spec, pulse)
    if dt <= 0:
        raise NumericsError("dt must be > 0")
    driven = pulse is not None and pulse.amplitude > 0
    if driven and dt > 1.0 / (DT_MIN_DIVISOR * pulse.carrier):
        raise NumericsError(
            f"dt={dt:.3e} s too coarse for carrier {pulse.carrier / 1e9:.3f} GHz; "
            f"need dt <= 1/({DT_MIN_DIVISOR}*carrier)"
        )
    if pulse is not None and t_end < pulse.duration:
        raise NumericsError("t_end must cover the pulse duration")

    if rho0 is None:
        rho = ground_state(spec)
    else:
        rho = np.array(rho0, dtype=np.complex128)
        rep = validate_state(rho)
        if rep.trace_error > 1e-6 or rep.hermiticity_error > 1e-6 or rep.min_eigenvalue < -1e-6:
            raise NumericsError(
                f"non-physical initial state: trace_error={rep.trace_error:.2e}, "
                f"hermiticity_error={rep.hermiticity_error:.2e}, "
                f"min_eigenvalue={rep.min_eigenvalue:.2e}"
            )
    rho = np.ascontiguousarray(rho, dtype=np.complex128)

    if record_stride is None:
        record_stride = max(1, int(math.floor(RECORD_INTERVAL / dt)))
    n_steps = int(math.ceil(t_end / dt - 1e-12))
    # Round up to a whole number of recording intervals so the output grid
    # always includes the final sample.
    if n_steps % record_stride:
        n_steps += record_stride - n_steps % record_stride

    h0 = build_static_hamiltonian(spec).entries
    pol = build_polarization_operator(spec).entries
    jumps = build_collective_jump_operators(spec)
    sm = jumps["s_minus"].entries
    sp = jumps["s_plus"].entries
    spsm = np.ascontiguousarray(sp @ sm)

    if pulse is not None:
        amp = TWO_PI * pulse.effective_amplitude()
        omega = TWO_PI * pulse.carrier
        pulse_end = pulse.duration
    else:
        amp = 0.0
        omega = 0.0
        pulse_end = 0.0

    n_rec = n_steps // record_stride + 1
    pop = np.zeros(n_rec)
    dip = np.zeros(n_rec if record_dipole else 1)

    final = _kernels.propagate(
        h0,
        pol,
        sm,
        sp,
        spsm,
        TWO_PI * spec.gamma,
        amp,
        omega,
        pulse_end,
        dt,
        n_steps,
        record_stride,
        rho,
        pop,
        dip,
        record_dipole,
    )
    times = np.arange(n_rec) * (record_stride * dt)
    return EvolutionResult(
        times=times,
        population=pop,
        dipole=dip if record_dipole else None,
        final_state=final,
    )
