"""Rectangular-waveguide mode math and drive-amplitude flattening."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DatasetError
from .model import GainTable

SPEED_OF_LIGHT = 299792458.0  # m/s


@dataclass(frozen=True)
class WaveguideGeometry:
    """Rectangular cross-section, width a >= height b, in meters."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a >= self.b > 0):
            raise ConfigError("geometry requires a >= b > 0")


@dataclass(frozen=True)
class ModeCutoff:
    m: int
    n: int
    f_c: float  # Hz


@dataclass
class FieldProfile:
    """Tabulated mean field at the sample plane vs frequency."""

    freq_axis: np.ndarray  # Hz
    mean_field: np.ndarray  # arbitrary field units
    target: float = 1.0

    def __post_init__(self):
        f = np.asarray(self.freq_axis, dtype=float)
        e = np.asarray(self.mean_field, dtype=float)
        if f.ndim != 1 or f.shape != e.shape or f.size == 0:
            raise ConfigError("profile needs matching 1-d axes")
        if np.any(np.diff(f) <= 0):
            raise ConfigError("profile frequencies must be strictly increasing")
        if np.any(e <= 0):
            raise ConfigError("mean field must be strictly positive")
        self.freq_axis = f
        self.mean_field = e


def cutoff_wavenumber(geom: WaveguideGeometry, m: int, n: int) -> float:
    """Transverse wavenumber k_c of mode (m, n) in rad/m."""
    return math.hypot(m * math.pi / geom.a, n * math.pi / geom.b)


def mode_cutoffs(
    geom: WaveguideGeometry, m_max: int, n_max: int
) -> list[ModeCutoff]:
    """Cutoff frequencies f_c = c*k_c/(2*pi) for (m, n) != (0, 0), ascending."""
    if m_max < 1 or n_max < 1:
        raise ConfigError("m_max and n_max must be >= 1")
    modes = []
    for m in range(m_max + 1):
        for n in range(n_max + 1):
            if m == 0 and n == 0:
                continue
            fc = SPEED_OF_LIGHT * cutoff_wavenumber(geom, m, n) / (2.0 * math.pi)
            modes.append(ModeCutoff(m=m, n=n, f_c=fc))
    modes.sort(key=lambda mc: (mc.f_c, mc.m, mc.n))
    return modes


def propagation_constant(
    geom: WaveguideGeometry, f: float, m: int = 1, n: int = 0
) -> tuple[float, bool]:
    """(beta in rad/m, evanescent flag) for mode (m, n) at frequency f.

    Below cutoff the wave decays exponentially; the magnitude of the
    imaginary propagation constant is returned with evanescent=True.
    """
    if f <= 0:
        raise ConfigError("frequency must be > 0")
    k = 2.0 * math.pi * f / SPEED_OF_LIGHT
    kc = cutoff_wavenumber(geom, m, n)
    arg = k * k - kc * kc
    if arg >= 0:
        return math.sqrt(arg), False
    return math.sqrt(-arg), True


def flatten_gain(profile: FieldProfile) -> GainTable:
    """Gain table scale(f) = target / mean_field(f) that flattens the profile."""
    return GainTable(
        freqs=profile.freq_axis, scales=profile.target / profile.mean_field
    )


def read_field_profile(path: str | Path, target: float = 1.0) -> FieldProfile:
    """Load a two-column `freq_hz, field` CSV (header required)."""
    path = Path(path)
    freqs, fields = [], []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip().lower() for c in header[:2]] != ["freq_hz", "field"]:
            raise DatasetError(f"{path}: expected header 'freq_hz, field'")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                freqs.append(float(row[0]))
                fields.append(float(row[1]))
            except (ValueError, IndexError) as exc:
                raise DatasetError(f"{path}:{lineno}: malformed row") from exc
    return FieldProfile(np.array(freqs), np.array(fields), target=target)


def write_gain_table(table: GainTable, path: str | Path) -> None:
    """Export a gain table in the same two-column CSV shape as a profile."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["freq_hz", "field"])
        for f, s in zip(table.freqs, table.scales):
            writer.writerow([repr(float(f)), repr(float(s))])
