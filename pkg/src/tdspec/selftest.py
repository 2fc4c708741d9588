"""Fast internal invariant checks, runnable from the CLI.

Each check prints one pass/fail line. The suite is a smoke test, not a
replacement for the full test suite; everything here finishes in seconds.
"""

from __future__ import annotations

import math
import tempfile
from pathlib import Path

import numpy as np

from . import analysis, datasets, floquet, lindblad, model, waveguide
from .model import DrivePulse, EnsembleSpec, TlsParams


def _check_operators() -> None:
    spec = EnsembleSpec(
        defects=(TlsParams(epsilon=3.5e9), TlsParams(epsilon=4.5e9)),
        couplings=[[0.0, 5e7], [5e7, 0.0]],
    )
    h0 = model.build_static_hamiltonian(spec).entries
    p = model.build_polarization_operator(spec).entries
    assert np.abs(h0 - h0.conj().T).max() == 0.0 or np.allclose(h0, h0.conj().T)
    assert np.allclose(p, p.conj().T)
    ops = model.build_collective_jump_operators(spec)
    assert np.allclose(ops["s_plus"].entries, ops["s_minus"].entries.conj().T)


def _check_tensor_sum() -> None:
    spec = EnsembleSpec(defects=(TlsParams(epsilon=3.0e9), TlsParams(epsilon=4.0e9)))
    h0 = model.build_static_hamiltonian(spec).entries
    evals = np.sort(np.linalg.eigvalsh(h0)) / model.TWO_PI
    expect = np.sort([0.5 * (s1 * 3.0e9 + s2 * 4.0e9) for s1 in (-1, 1) for s2 in (-1, 1)])
    assert np.allclose(evals, expect, rtol=1e-12)


def _check_decay() -> None:
    spec = EnsembleSpec(defects=(TlsParams(epsilon=4.0e9),), gamma=1e6)
    pulse = DrivePulse(carrier=4.0e9, amplitude=0.0, duration=1e-9)
    rho0 = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=np.complex128)
    res = lindblad.evolve(spec, pulse, t_end=100e-9, dt=1e-11, rho0=rho0)
    gamma_ang = model.TWO_PI * spec.gamma
    expect = np.exp(-2.0 * gamma_ang * res.times)
    err = np.abs(res.population - expect).max()
    assert err < 1e-6, f"decay error {err:.2e}"


def _check_floquet_fold() -> None:
    spec = EnsembleSpec(defects=(TlsParams(epsilon=4.1e9),))
    pulse = DrivePulse(carrier=1.0e9, amplitude=0.0, duration=1e-9)
    qe = floquet.quasi_energies(spec, pulse, m_max=8)
    folded = floquet.fold_to_zone(np.array([-2.05e9, 2.05e9]), 1.0e9)
    assert np.allclose(np.sort(qe.quasi_energies), np.sort(folded), rtol=0, atol=1e-3)


def _bessel_quadrature(n: int, x: float) -> float:
    theta = np.linspace(0.0, math.pi, 20001)
    return float(np.trapezoid(np.cos(n * theta - x * np.sin(theta)), theta) / math.pi)


def _check_bessel_series() -> None:
    for n, x in ((0, 0.5), (1, 2.3), (3, 7.7)):
        got = floquet.bessel_j(n, x)
        ref = _bessel_quadrature(n, x)
        assert abs(got - ref) < 1e-9, f"J_{n}({x}): {got} vs {ref}"


def _check_g2_constant() -> None:
    sgram = analysis.Spectrogram(
        row_axis=np.array([1.0e9]),
        col_axis=1e-9 * np.arange(64),
        values=np.full((1, 64), 3.0),
        col_unit="s",
        pulse_off_index=0,
    )
    corr = analysis.g2_map(sgram, max_lag=32e-9)
    assert np.all(corr.g2 == 1.0)


def _check_chi_even() -> None:
    lags = np.arange(65)
    raw = np.exp(-0.1 * lags**2)[None, :]
    corr = analysis.CorrelationMap(
        row_axis=np.array([1.0e9]),
        lag_axis=lags * 1e-9,
        g2=raw,
        raw=raw,
        row_mask=None,
        meta={},
    )
    chi = analysis.chi_imag(corr, two_sided=True)
    assert np.abs(chi.chi).max() < 1e-10


def _check_waveguide() -> None:
    geom = waveguide.WaveguideGeometry(a=58.17e-3, b=29.08e-3)
    modes = waveguide.mode_cutoffs(geom, 1, 1)
    te10 = modes[0]
    assert (te10.m, te10.n) == (1, 0)
    assert abs(te10.f_c - 2.577e9) < 1e6
    beta, evan = waveguide.propagation_constant(geom, te10.f_c, te10.m, te10.n)
    assert beta == 0.0 and not evan


def _check_roundtrip() -> None:
    trace = analysis.TimeTrace(
        t0=0.0, dt=1e-9, kind="iq", samples=np.arange(8) + 1j * np.arange(8)
    )
    with tempfile.TemporaryDirectory() as tmp:
        p = Path(tmp) / "ds"
        datasets.write_dataset(trace, p)
        back = datasets.read_dataset(p)
    assert np.array_equal(back.samples, trace.samples)
    assert back.dt == trace.dt and back.t0 == trace.t0


CHECKS = [
    ("operator hermiticity and adjoint pairs", _check_operators),
    ("uncoupled spectrum is the tensor sum", _check_tensor_sum),
    ("collective decay matches the closed form", _check_decay),
    ("zero-amplitude quasi-energies fold exactly", _check_floquet_fold),
    ("bessel recurrence matches quadrature", _check_bessel_series),
    ("g2 of constant intensity is 1", _check_g2_constant),
    ("chi'' of an even correlation vanishes", _check_chi_even),
    ("waveguide cutoff and propagation onset", _check_waveguide),
    ("dataset round-trip is bit-exact", _check_roundtrip),
]


def run_selftest(stream=None) -> int:
    """Run every check; print one line each; return count of failures."""
    import sys

    stream = stream or sys.stdout
    failures = 0
    for name, fn in CHECKS:
        try:
            fn()
        except Exception as exc:  # report and continue
            failures += 1
            print(f"FAIL {name}: {exc}", file=stream)
        else:
            print(f"PASS {name}", file=stream)
    print(
        f"{len(CHECKS) - failures}/{len(CHECKS)} checks passed",
        file=stream,
    )
    return failures
