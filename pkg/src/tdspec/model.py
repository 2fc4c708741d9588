"""Hamiltonians and operators for ensembles of tunneling two-level defects.

All user-facing quantities are linear frequencies in Hz. Operator matrices
are built in angular units (rad/s), i.e. every Hz value is multiplied by 2*pi
when it enters a Hamiltonian. Dipole weights and the collective polarization
operator are dimensionless; the drive amplitude carries the scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, NumericsError

TWO_PI = 2.0 * math.pi

# Relative tolerance for the hermiticity check on flagged operators.
HERMITIAN_RTOL = 1e-12

# Default cap on ensemble size (Hilbert dimension 2**N).
DEFAULT_MAX_DEFECTS = 8

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128)
# Basis ordering is (excited, ground) per site, so sigma_minus lowers e -> g.
SIGMA_MINUS = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=np.complex128)
SIGMA_PLUS = SIGMA_MINUS.conj().T.copy()
IDENTITY2 = np.eye(2, dtype=np.complex128)


@dataclass(frozen=True)
class TlsParams:
    """Single defect: asymmetry and tunneling amplitude in Hz, dipole weight."""

    epsilon: float
    delta: float = 0.0
    dipole: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.epsilon) and math.isfinite(self.delta)):
            raise ConfigError("epsilon and delta must be finite")
        if self.delta < 0:
            raise ConfigError("delta must be >= 0")
        if self.epsilon == 0.0 and self.delta == 0.0:
            raise ConfigError("(epsilon, delta) = (0, 0) has no defined splitting")


def tls_splitting(p: TlsParams) -> tuple[float, float]:
    """Return (splitting in Hz, mixing angle in radians) for one defect."""
    energy = math.hypot(p.epsilon, p.delta)
    theta = math.atan2(p.delta, p.epsilon)
    return energy, theta


@dataclass(frozen=True)
class DisorderSpec:
    """Uniform redraw ranges for defect frequencies and couplings, seeded.

    `assign` selects which defect parameter receives the drawn frequency:
    "epsilon" (asymmetry; the default) or "delta" (tunneling amplitude, i.e.
    symmetric wells whose splitting equals the draw and whose dipole
    coupling is fully transverse).
    """

    epsilon_range: tuple[float, float]
    j_range: tuple[float, float]
    seed: int
    assign: str = "epsilon"

    def __post_init__(self):
        if self.epsilon_range[0] > self.epsilon_range[1]:
            raise ConfigError("epsilon_range must satisfy lo <= hi")
        if self.j_range[0] > self.j_range[1]:
            raise ConfigError("j_range must satisfy lo <= hi")
        if self.assign not in ("epsilon", "delta"):
            raise ConfigError("assign must be 'epsilon' or 'delta'")


@dataclass(frozen=True)
class EnsembleSpec:
    """N defects, pairwise sigma_x sigma_x couplings (Hz), collective decay rate."""

    defects: tuple[TlsParams, ...]
    couplings: np.ndarray | None = None
    gamma: float = 0.0
    disorder: DisorderSpec | None = None
    max_defects: int = DEFAULT_MAX_DEFECTS

    def __post_init__(self):
        if len(self.defects) < 1:
            raise ConfigError("ensemble needs at least one defect")
        if len(self.defects) > self.max_defects:
            raise ConfigError(
                f"N={len(self.defects)} exceeds the dimension cap "
                f"(max_defects={self.max_defects})"
            )
        if self.gamma < 0:
            raise ConfigError("gamma must be >= 0")
        n = len(self.defects)
        j = self.couplings
        if j is None:
            j = np.zeros((n, n))
        j = np.asarray(j, dtype=float)
        if j.shape != (n, n):
            raise ConfigError(f"couplings must be {n}x{n}")
        if not np.allclose(j, j.T, atol=0.0):
            raise ConfigError("couplings must be symmetric")
        if np.any(np.diag(j) != 0.0):
            raise ConfigError("couplings must have zero diagonal")
        object.__setattr__(self, "defects", tuple(self.defects))
        object.__setattr__(self, "couplings", j)

    @property
    def n(self) -> int:
        return len(self.defects)

    @property
    def dim(self) -> int:
        return 2 ** len(self.defects)


@dataclass(frozen=True)
class GainTable:
    """Frequency-dependent drive scale, linearly interpolated between points."""

    freqs: np.ndarray
    scales: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.freqs, dtype=float)
        s = np.asarray(self.scales, dtype=float)
        if f.ndim != 1 or f.shape != s.shape or f.size == 0:
            raise ConfigError("gain table needs matching 1-d freqs and scales")
        if np.any(np.diff(f) <= 0):
            raise ConfigError("gain table frequencies must be strictly increasing")
        if np.any(s <= 0):
            raise ConfigError("gain table scales must be strictly positive")
        object.__setattr__(self, "freqs", f)
        object.__setattr__(self, "scales", s)

    def scale_at(self, freq_hz: float) -> float:
        return float(np.interp(freq_hz, self.freqs, self.scales))


ENVELOPES = ("square", "square-cosine")


@dataclass(frozen=True)
class DrivePulse:
    """Gated cosine drive: carrier and amplitude in Hz, duration in seconds.

    Both envelope names produce a constant-amplitude cosine carrier gated by
    a rectangular window; no rise-time shaping is applied.
    """

    carrier: float
    amplitude: float
    duration: float
    envelope: str = "square-cosine"
    gain_table: GainTable | None = None

    def __post_init__(self):
        if self.carrier <= 0:
            raise ConfigError("carrier must be > 0")
        if self.amplitude < 0:
            raise ConfigError("amplitude must be >= 0")
        if self.duration <= 0:
            raise ConfigError("duration must be > 0")
        if self.envelope not in ENVELOPES:
            raise ConfigError(f"envelope must be one of {ENVELOPES}")

    def effective_amplitude(self) -> float:
        """Amplitude in Hz after gain-table interpolation at the carrier."""
        if self.gain_table is None:
            return self.amplitude
        return self.amplitude * self.gain_table.scale_at(self.carrier)


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense complex operator on the 2**N Hilbert space."""

    dim: int
    entries: np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        m = np.ascontiguousarray(self.entries, dtype=np.complex128)
        if m.shape != (self.dim, self.dim):
            raise ConfigError(f"entries must be {self.dim}x{self.dim}")
        if self.hermitian:
            scale = np.abs(m).max()
            dev = np.abs(m - m.conj().T).max()
            if scale > 0 and dev > HERMITIAN_RTOL * scale:
                raise NumericsError(
                    f"operator flagged hermitian deviates by {dev / scale:.3e} relative"
                )
        object.__setattr__(self, "entries", m)

    @classmethod
    def wrap(cls, entries: np.ndarray, hermitian: bool = False) -> "OperatorMatrix":
        entries = np.asarray(entries)
        return cls(dim=entries.shape[0], entries=entries, hermitian=hermitian)


def _embed(op: np.ndarray, site: int, n: int) -> np.ndarray:
    """Tensor-embed a single-site operator at position `site` of `n` sites."""
    out = np.eye(1, dtype=np.complex128)
    for j in range(n):
        out = np.kron(out, op if j == site else IDENTITY2)
    return out


def build_static_hamiltonian(spec: EnsembleSpec) -> OperatorMatrix:
    """H0 = sum_j (E_j/2) sigma_z^j + sum_{i<j} J_ij sigma_x^i sigma_x^j, in rad/s."""
    n = spec.n
    h = np.zeros((spec.dim, spec.dim), dtype=np.complex128)
    for j, d in enumerate(spec.defects):
        energy, _ = tls_splitting(d)
        h += 0.5 * TWO_PI * energy * _embed(SIGMA_Z, j, n)
    for i in range(n):
        for j in range(i + 1, n):
            jij = spec.couplings[i, j]
            if jij != 0.0:
                h += TWO_PI * jij * (_embed(SIGMA_X, i, n) @ _embed(SIGMA_X, j, n))
    return OperatorMatrix.wrap(h, hermitian=True)


def build_polarization_operator(spec: EnsembleSpec) -> OperatorMatrix:
    """Collective dipole P = sum_j p_j (cos(theta_j) sz^j + sin(theta_j) sx^j)."""
    n = spec.n
    p = np.zeros((spec.dim, spec.dim), dtype=np.complex128)
    for j, d in enumerate(spec.defects):
        _, theta = tls_splitting(d)
        op = math.cos(theta) * SIGMA_Z + math.sin(theta) * SIGMA_X
        p += d.dipole * _embed(op, j, n)
    return OperatorMatrix.wrap(p, hermitian=True)


def build_collective_jump_operators(spec: EnsembleSpec) -> dict[str, OperatorMatrix]:
    """Collective S- = sum_j sigma_-^j and its adjoint S+."""
    n = spec.n
    sm = np.zeros((spec.dim, spec.dim), dtype=np.complex128)
    for j in range(n):
        sm += _embed(SIGMA_MINUS, j, n)
    return {
        "s_minus": OperatorMatrix.wrap(sm),
        "s_plus": OperatorMatrix.wrap(sm.conj().T.copy()),
    }


def drive_field(pulse: DrivePulse, t: float) -> float:
    """Dimensionless drive field A_eff*cos(2*pi*carrier*t) gated to [0, duration]."""
    if t < 0:
        raise NumericsError("drive field requested at t < 0")
    if t > pulse.duration:
        return 0.0
    return pulse.effective_amplitude() * math.cos(TWO_PI * pulse.carrier * t)


def driven_hamiltonian_at(
    spec: EnsembleSpec, pulse: DrivePulse, t: float
) -> OperatorMatrix:
    """Lab-frame H(t) = H0 - P * E(t) in rad/s; no rotating-wave approximation."""
    h0 = build_static_hamiltonian(spec).entries
    p = build_polarization_operator(spec).entries
    e = TWO_PI * drive_field(pulse, t)
    return OperatorMatrix.wrap(h0 - e * p, hermitian=True)


def sample_disorder(spec: EnsembleSpec, seed: int | None = None) -> EnsembleSpec:
    """Draw a concrete ensemble from the disorder description.

    Defect frequencies are redrawn uniformly per defect (into epsilon or
    delta, per the disorder's `assign` field) and couplings uniformly per
    pair (i<j, then symmetrized); dipoles and the untouched well parameter
    are kept from the template. Deterministic for a fixed seed.
    """
    if spec.disorder is None:
        raise ConfigError("spec has no disorder description to sample")
    dis = spec.disorder
    rng = np.random.default_rng(dis.seed if seed is None else seed)
    n = spec.n
    eps = rng.uniform(dis.epsilon_range[0], dis.epsilon_range[1], size=n)
    if dis.assign == "delta":
        defects = tuple(
            replace(d, delta=float(e)) for d, e in zip(spec.defects, eps)
        )
    else:
        defects = tuple(
            replace(d, epsilon=float(e)) for d, e in zip(spec.defects, eps)
        )
    j = np.zeros((n, n))
    for i in range(n):
        for k in range(i + 1, n):
            j[i, k] = j[k, i] = rng.uniform(dis.j_range[0], dis.j_range[1])
    return EnsembleSpec(
        defects=defects,
        couplings=j,
        gamma=spec.gamma,
        disorder=None,
        max_defects=spec.max_defects,
    )
