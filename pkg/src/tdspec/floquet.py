"""Quasi-energy structure of the in-pulse periodic Hamiltonian.

The gated drive is periodic while it is on, so the stroboscopic spectrum is
obtained from the block-tridiagonal extended-space Hamiltonian with diagonal
blocks H0 + m*Omega and off-diagonal coupling V = -(A/2) P. Quasi-energies
are reported in Hz, folded into the first zone (-Omega/2, Omega/2].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericsError
from .model import (
    TWO_PI,
    DrivePulse,
    EnsembleSpec,
    OperatorMatrix,
    build_polarization_operator,
    build_static_hamiltonian,
)

DEFAULT_M_MAX = 12
DEFAULT_CONVERGENCE_TOL = 0.1e6  # Hz
MAX_DOUBLINGS = 2


def bessel_j(n: int, x: float) -> float:
    """Bessel function of the first kind, integer order, by Miller recurrence.

    Downward recurrence from well above max(n, |x|), normalized with
    J0 + 2*sum(J_{2k}) = 1. Accurate to ~1e-12 for the moderate arguments
    used here; cross-checked against an integral-representation quadrature
    oracle in the test suite.
    """
    if n < 0:
        return (-1.0) ** (-n) * bessel_j(-n, x)
    ax = abs(x)
    if ax == 0.0:
        return 1.0 if n == 0 else 0.0
    sign = -1.0 if (x < 0.0 and n % 2 == 1) else 1.0

    start = max(n, int(ax)) + 1
    m = 2 * ((start + int(math.sqrt(160.0 * start)) + 20) // 2)
    bjp = 0.0  # J_{k+1}
    bj = 1.0e-30  # J_k
    norm = 0.0
    ans = 0.0
    for k in range(m, 0, -1):
        bjm = (2.0 * k / ax) * bj - bjp
        bjp = bj
        bj = bjm  # J_{k-1}
        if abs(bj) > 1.0e10:
            bj *= 1.0e-10
            bjp *= 1.0e-10
            norm *= 1.0e-10
            ans *= 1.0e-10
        if (k - 1) % 2 == 0:
            norm += 2.0 * bj
        if k - 1 == n:
            ans = bj
    norm -= bj  # J0 was accumulated with weight 2
    return sign * ans / norm


def n_photon_coupling(amplitude: float, drive_freq: float, n: int) -> float:
    """Effective n-photon coupling 2*A*J_n(2A/Omega), all in Hz."""
    if n < 1:
        raise ConfigError("photon number n must be >= 1")
    if drive_freq <= 0:
        raise ConfigError("drive_freq must be > 0")
    if amplitude == 0.0:
        return 0.0
    return 2.0 * amplitude * bessel_j(n, 2.0 * amplitude / drive_freq)


@dataclass
class FloquetSpectrum:
    drive_freq: float
    harmonics: int
    quasi_energies: np.ndarray  # Hz, folded into (-Omega/2, Omega/2], sorted
    convergence_error: float  # Hz


@dataclass
class FloquetResponse:
    omega_grid: np.ndarray  # Hz
    chi_nm: np.ndarray  # complex, arbitrary units
    eta: float  # Hz


@dataclass
class QuasiEnergySweep:
    drive_freqs: np.ndarray  # Hz
    energies: np.ndarray  # (len(drive_freqs), 2**N) Hz
    harmonics: int


def build_extended_hamiltonian(
    h0: OperatorMatrix | np.ndarray,
    v: OperatorMatrix | np.ndarray,
    drive_freq: float,
    m_max: int,
) -> np.ndarray:
    """Block-tridiagonal extended Hamiltonian for H(t)=H0+V e^{iwt}+V+ e^{-iwt}.

    Inputs in rad/s except drive_freq in Hz; returns a Hermitian matrix of
    dimension (2*m_max+1)*dim in rad/s.
    """
    if m_max < 1:
        raise ConfigError("m_max must be >= 1")
    h0 = h0.entries if isinstance(h0, OperatorMatrix) else np.asarray(h0)
    v = v.entries if isinstance(v, OperatorMatrix) else np.asarray(v)
    d = h0.shape[0]
    omega = TWO_PI * drive_freq
    nblk = 2 * m_max + 1
    ext = np.zeros((nblk * d, nblk * d), dtype=np.complex128)
    eye = np.eye(d)
    vdag = v.conj().T
    for bi, mode in enumerate(range(-m_max, m_max + 1)):
        sl = slice(bi * d, (bi + 1) * d)
        ext[sl, sl] = h0 + mode * omega * eye
        if bi + 1 < nblk:
            sl2 = slice((bi + 1) * d, (bi + 2) * d)
            ext[sl, sl2] = v
            ext[sl2, sl] = vdag
    return ext


def fold_to_zone(values_hz: np.ndarray, drive_freq: float) -> np.ndarray:
    """Fold frequencies into the half-open first zone (-Omega/2, Omega/2]."""
    v = np.asarray(values_hz, dtype=float)
    r = v - drive_freq * np.round(v / drive_freq)
    r = np.where(r <= -0.5 * drive_freq, r + drive_freq, r)
    r = np.where(r > 0.5 * drive_freq, r - drive_freq, r)
    return r


def _drive_operator(spec: EnsembleSpec, pulse: DrivePulse) -> np.ndarray:
    # E(t) = A cos(wt) => V = V^dag = -(A/2) P, in rad/s.
    pol = build_polarization_operator(spec).entries
    return -0.5 * TWO_PI * pulse.effective_amplitude() * pol


def _zone_energies(
    h0: np.ndarray, v: np.ndarray, drive_freq: float, m_max: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Diagonalize the extended space and keep one replica per physical state.

    Replicas are deduplicated by dominant Fourier weight: the 2**N
    eigenvectors with the largest norm in the m=0 block are selected.
    Returns (folded energies in Hz, raw eigenvalues in Hz, eigenvectors).
    """
    d = h0.shape[0]
    ext = build_extended_hamiltonian(h0, v, drive_freq, m_max)
    evals, evecs = np.linalg.eigh(ext)
    blocks = evecs.reshape(2 * m_max + 1, d, evecs.shape[1])
    weight = np.sum(np.abs(blocks[m_max]) ** 2, axis=0)
    idx = np.sort(np.argsort(weight)[::-1][:d])
    raw_hz = evals[idx] / TWO_PI
    folded = fold_to_zone(raw_hz, drive_freq)
    return folded, raw_hz, evecs[:, idx]


def quasi_energies(
    spec: EnsembleSpec,
    pulse: DrivePulse,
    m_max: int = DEFAULT_M_MAX,
    tol: float = DEFAULT_CONVERGENCE_TOL,
    auto_expand: bool = True,
) -> FloquetSpectrum:
    """Folded quasi-energy spectrum of the driven ensemble.

    The convergence error is the maximum change of the (sorted, folded)
    spectrum between truncations m_max-1 and m_max; m_max is doubled up to
    twice if it exceeds `tol`.
    """
    if m_max < 2:
        raise ConfigError("m_max must be >= 2")
    h0 = build_static_hamiltonian(spec).entries
    v = _drive_operator(spec, pulse)
    f = pulse.carrier
    attempts = 0
    while True:
        cur = np.sort(_zone_energies(h0, v, f, m_max)[0])
        prev = np.sort(_zone_energies(h0, v, f, m_max - 1)[0])
        err = float(np.max(np.abs(cur - prev)))
        if err <= tol or not auto_expand or attempts >= MAX_DOUBLINGS:
            break
        m_max *= 2
        attempts += 1
    if err > tol:
        raise NumericsError(
            f"quasi-energies not converged: error {err / 1e6:.3f} MHz > "
            f"{tol / 1e6:.3f} MHz at m_max={m_max}"
        )
    return FloquetSpectrum(
        drive_freq=f,
        harmonics=m_max,
        quasi_energies=cur,
        convergence_error=err,
    )


def floquet_dipole_matrix(
    spec: EnsembleSpec, pulse: DrivePulse, m_max: int = DEFAULT_M_MAX
) -> tuple[np.ndarray, np.ndarray]:
    """Representative quasi-energies (Hz) and Fourier dipole matrix d^m.

    The energies are the raw eigenvalues of the replicas with dominant m=0
    Fourier weight, so they are consistent with the returned matrix elements
    (the pole sum needs energy and vector from the same replica). The dipole
    array has shape (4*m_max+1, dim, dim); index m + 2*m_max holds
    d^m_{ab} = sum_k <u_a^k| P |u_b^{k+m}>.
    """
    h0 = build_static_hamiltonian(spec).entries
    v = _drive_operator(spec, pulse)
    pol = build_polarization_operator(spec).entries
    _, raw, vecs = _zone_energies(h0, v, pulse.carrier, m_max)
    d = h0.shape[0]
    nblk = 2 * m_max + 1
    blocks = vecs.reshape(nblk, d, d)  # (fourier block, hilbert, state)
    pu = np.einsum("ij,kjs->kis", pol, blocks)
    dmat = np.zeros((4 * m_max + 1, d, d), dtype=np.complex128)
    for m in range(-2 * m_max, 2 * m_max + 1):
        acc = np.zeros((d, d), dtype=np.complex128)
        for k in range(nblk):
            k2 = k + m
            if 0 <= k2 < nblk:
                acc += blocks[k].conj().T @ pu[k2]
        dmat[m + 2 * m_max] = acc
    return raw, dmat


def floquet_response(
    spec: EnsembleSpec,
    pulse: DrivePulse,
    m_max: int,
    omega_grid: np.ndarray,
    eta: float = 1e6,
    n: int = 0,
    m: int = 0,
) -> FloquetResponse:
    """Explicit pole-sum dielectric response on a frequency grid (Hz).

    chi_nm(w) = sum_{a,b,l} d^l_{ab} d^{m-n-l}_{ba} /
                (w - (E_a - E_b + l*Omega) + i*eta),
    with l running over [-m_max, m_max]. Reported in arbitrary units.
    """
    if eta <= 0:
        raise ConfigError("eta must be > 0")
    omega_grid = np.asarray(omega_grid, dtype=float)
    energies, dmat = floquet_dipole_matrix(spec, pulse, m_max)
    f = pulse.carrier
    d = energies.size
    diff = energies[:, None] - energies[None, :]  # E_a - E_b
    nums = []
    poles = []
    for l in range(-m_max, m_max + 1):
        mm = m - n - l
        if abs(mm) > 2 * m_max:
            continue
        num = dmat[l + 2 * m_max] * dmat[mm + 2 * m_max].T
        nums.append(num.ravel())
        poles.append((diff + l * f).ravel())
    nums = np.concatenate(nums)
    poles = np.concatenate(poles)
    chi = np.empty(omega_grid.size, dtype=np.complex128)
    for i, w in enumerate(omega_grid):
        chi[i] = np.sum(nums / (w - poles + 1j * eta))
    return FloquetResponse(omega_grid=omega_grid, chi_nm=chi, eta=eta)


def sweep_quasi_energies(
    spec: EnsembleSpec,
    pulse_template: DrivePulse,
    drive_freqs: np.ndarray,
    m_max: int = DEFAULT_M_MAX,
    tol: float = DEFAULT_CONVERGENCE_TOL,
) -> QuasiEnergySweep:
    """Quasi-energy bands as a function of drive frequency."""
    from dataclasses import replace

    drive_freqs = np.asarray(drive_freqs, dtype=float)
    rows = []
    for f in drive_freqs:
        pulse = replace(pulse_template, carrier=float(f))
        rows.append(quasi_energies(spec, pulse, m_max=m_max, tol=tol).quasi_energies)
    return QuasiEnergySweep(
        drive_freqs=drive_freqs, energies=np.vstack(rows), harmonics=m_max
    )
