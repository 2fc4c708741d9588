"""Post-processing pipeline for simulated or imported transient records.

Row-wise transforms over 2-D maps (drive frequency x time): log-magnitude
ring-down FFTs, two-time intensity correlations, dissipative response
extraction from those correlations, exponential lifetime fits, pulse
bandwidth, and difference maps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericsError

TRACE_KINDS = ("iq", "amplitude", "intensity")

# Additive floor (relative to the map maximum) applied before log scaling.
LOG_FLOOR_REL = 1e-6

# Rows whose mean intensity falls below this fraction of the strongest row
# are masked in correlation maps.
G2_NOISE_FLOOR_REL = 1e-12


@dataclass
class TimeTrace:
    """Uniformly sampled signal; kind selects the sample scalar type."""

    t0: float
    dt: float
    kind: str
    samples: np.ndarray

    def __post_init__(self):
        if self.dt <= 0:
            raise ConfigError("dt must be > 0")
        if self.kind not in TRACE_KINDS:
            raise ConfigError(f"kind must be one of {TRACE_KINDS}")
        want_complex = self.kind == "iq"
        samples = np.asarray(
            self.samples, dtype=np.complex128 if want_complex else np.float64
        )
        if not np.all(np.isfinite(samples.view(np.float64))):
            raise ConfigError("samples must be finite")
        self.samples = samples

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.samples.size)


@dataclass
class Spectrogram:
    """2-D map over (drive frequency, time-or-frequency) with axis metadata."""

    row_axis: np.ndarray  # drive frequency, Hz
    col_axis: np.ndarray  # time (s) or frequency (Hz)
    values: np.ndarray
    scale: str = "linear"  # or "log"
    col_unit: str = "s"
    pulse_off_index: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.row_axis = np.asarray(self.row_axis, dtype=float)
        self.col_axis = np.asarray(self.col_axis, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.row_axis.size, self.col_axis.size):
            raise ConfigError("values shape must match axes")
        if np.any(np.diff(self.row_axis) <= 0) and self.row_axis.size > 1:
            raise ConfigError("row axis must be strictly increasing")
        if np.any(np.diff(self.col_axis) <= 0) and self.col_axis.size > 1:
            raise ConfigError("column axis must be strictly increasing")


@dataclass
class CorrelationMap:
    """Per-row two-time intensity correlation g2(lag), plus the raw product."""

    row_axis: np.ndarray
    lag_axis: np.ndarray
    g2: np.ndarray
    raw: np.ndarray | None = None  # unnormalized <I(t) I(t+lag)>
    row_mask: np.ndarray | None = None  # False where the row was too weak
    meta: dict = field(default_factory=dict)


@dataclass
class ChiMap:
    """Imaginary (dissipative) response per drive row on a frequency grid."""

    row_axis: np.ndarray
    omega_axis: np.ndarray  # Hz
    chi: np.ndarray
    meta: dict = field(default_factory=dict)


@dataclass
class Series:
    """Simple named 1-D series (linecuts, driven-response averages)."""

    x: np.ndarray
    y: np.ndarray
    name: str = "series"
    x_unit: str = "Hz"
    y_unit: str = "arb"


@dataclass
class LifetimeFit:
    tau: float
    amplitude: float
    residual: float


def homodyne_amplitude(trace: TimeTrace) -> TimeTrace:
    """A(t) = sqrt(I^2 + Q^2) from a complex quadrature record."""
    if trace.kind != "iq":
        raise ConfigError("homodyne_amplitude needs an IQ trace")
    return TimeTrace(trace.t0, trace.dt, "amplitude", np.abs(trace.samples))


def intensity(trace: TimeTrace) -> TimeTrace:
    """Intensity proportional to the squared amplitude."""
    if trace.kind != "amplitude":
        raise ConfigError("intensity needs an amplitude trace")
    return TimeTrace(trace.t0, trace.dt, "intensity", trace.samples**2)


def _next_pow2(n: int) -> int:
    p = 1
    while p < n:
        p *= 2
    return p


def _select_window(spectrogram: Spectrogram, window: str) -> np.ndarray:
    if window == "full":
        return spectrogram.values
    if window == "post_pulse":
        if spectrogram.pulse_off_index is None:
            raise ConfigError("post_pulse window requires pulse_off_index")
        return spectrogram.values[:, spectrogram.pulse_off_index :]
    raise ConfigError("window must be 'full' or 'post_pulse'")


def ringdown_fft(
    spectrogram: Spectrogram,
    window: str = "full",
    log_input: bool = False,
    taper: str = "hann",
) -> Spectrogram:
    """Per-row magnitude spectrum of the (optionally log-scaled) time map.

    Rows are mean-subtracted, tapered and zero-padded to the next power of
    two >= 4x the window length; the output column axis is frequency in Hz.
    `taper='none'` disables the Hann window (used for Parseval checks).
    """
    if spectrogram.col_unit != "s":
        raise ConfigError("ringdown_fft expects a time-domain map")
    data = _select_window(spectrogram, window)
    nt = data.shape[1]
    if nt < 2:
        raise ConfigError("window too short for a spectrum")
    dt = float(spectrogram.col_axis[1] - spectrogram.col_axis[0])
    if log_input:
        floor = LOG_FLOOR_REL * float(np.abs(spectrogram.values).max())
        if floor == 0.0:
            floor = np.finfo(float).tiny
        data = np.log10(data + floor)
    data = data - data.mean(axis=1, keepdims=True)
    if taper == "hann":
        data = data * np.hanning(nt)[None, :]
    elif taper != "none":
        raise ConfigError("taper must be 'hann' or 'none'")
    npad = _next_pow2(4 * nt)
    spec = np.abs(np.fft.rfft(data, n=npad, axis=1))
    freqs = np.fft.rfftfreq(npad, dt)
    return Spectrogram(
        row_axis=spectrogram.row_axis,
        col_axis=freqs,
        values=spec,
        scale="linear",
        col_unit="Hz",
        meta={
            "window": window,
            "log_input": log_input,
            "taper": taper,
            "n_time": nt,
            "n_pad": npad,
            "resolution_hz": 1.0 / (nt * dt),
        },
    )


def g2_map(
    spectrogram: Spectrogram,
    max_lag: float,
    window: str = "post_pulse",
    noise_floor_rel: float = G2_NOISE_FLOOR_REL,
) -> CorrelationMap:
    """Normalized two-time correlation g2(lag) per drive row.

    g2(lag) = <I(t) I(t+lag)>_t / <I(t)>^2 over the selected window, with
    shrinking overlap (each lag divides by its number of valid pairs). Rows
    whose mean intensity is below `noise_floor_rel` times the strongest row
    are masked (g2 set to 0, row_mask False) rather than left as NaN.
    """
    data = _select_window(spectrogram, window)
    if np.any(data < 0):
        raise ConfigError("g2_map expects nonnegative intensities")
    nt = data.shape[1]
    dt = float(spectrogram.col_axis[1] - spectrogram.col_axis[0])
    n_lags = int(math.floor(max_lag / dt)) + 1
    if n_lags > nt:
        raise ConfigError("max_lag exceeds the window length")
    raw = np.empty((data.shape[0], n_lags))
    for k in range(n_lags):
        if k == 0:
            raw[:, k] = np.mean(data * data, axis=1)
        else:
            raw[:, k] = np.mean(data[:, :-k] * data[:, k:], axis=1)
    mean_i = data.mean(axis=1)
    denom = mean_i**2
    mask = denom > noise_floor_rel * denom.max() if denom.max() > 0 else denom > 0
    g2 = np.zeros_like(raw)
    g2[mask] = raw[mask] / denom[mask, None]
    return CorrelationMap(
        row_axis=spectrogram.row_axis,
        lag_axis=dt * np.arange(n_lags),
        g2=g2,
        raw=raw,
        row_mask=mask,
        meta={"window": window, "dt": dt},
    )


def chi_imag(
    corr: CorrelationMap,
    omega_grid: np.ndarray | None = None,
    two_sided: bool = False,
) -> ChiMap:
    """Dissipative response from the unnormalized intensity autocorrelation.

    chi''(w) ~ Im sum_k win_k C(lag_k) exp(+i 2 pi w lag_k) dlag, one-sided
    over the causal lags with a half-Hann taper (unity at lag 0). The
    `two_sided` mode mirrors C to an even function first and exists for
    testing: the transform of a real even function is real, so it returns
    ~0 everywhere.
    """
    if corr.raw is None:
        raise ConfigError("chi_imag needs the raw correlation")
    if corr.raw.shape[1] == 0:
        raise ConfigError("empty correlation")
    lags = corr.lag_axis
    dlag = float(lags[1] - lags[0]) if lags.size > 1 else 1.0
    n = lags.size
    win = np.cos(0.5 * math.pi * np.arange(n) / n) ** 2  # half-Hann, 1 at lag 0
    weighted = corr.raw * win[None, :]
    if two_sided:
        # mirror to even support [-L, L]; keep lag 0 once
        ext = np.concatenate([weighted[:, :0:-1], weighted], axis=1)
        npad = _next_pow2(4 * ext.shape[1])
        spec = np.fft.fft(ext, n=npad, axis=1)
        freqs = np.fft.fftfreq(npad, dlag)
        keep = freqs >= 0
        # phase-shift to recenter lag 0 (mirrored array starts at -L+dlag)
        shift = np.exp(2j * math.pi * freqs[keep] * (n - 1) * dlag)
        chi_full = -dlag * (spec[:, keep] * shift[None, :]).imag
        freqs = freqs[keep]
    else:
        npad = _next_pow2(4 * n)
        spec = np.fft.rfft(weighted, n=npad, axis=1)
        freqs = np.fft.rfftfreq(npad, dlag)
        chi_full = -dlag * spec.imag  # rfft uses e^{-iwt}; flip for e^{+iwt}
    if omega_grid is None:
        omega_grid = freqs
        chi = chi_full
    else:
        omega_grid = np.asarray(omega_grid, dtype=float)
        phase = np.exp(
            2j * math.pi * omega_grid[None, :] * lags[:, None]
        )  # (n_lags, n_freq)
        if two_sided:
            full_lags = np.concatenate([-lags[:0:-1], lags])
            phase = np.exp(2j * math.pi * omega_grid[None, :] * full_lags[:, None])
            chi = dlag * (ext @ phase).imag
        else:
            chi = dlag * (weighted @ phase).imag
    return ChiMap(
        row_axis=corr.row_axis,
        omega_axis=omega_grid,
        chi=chi,
        meta={"two_sided": two_sided},
    )


def chi_zero_contours(chi_map: ChiMap) -> list[tuple[float, float]]:
    """Sign-change locations of chi'' per row, linearly interpolated.

    Returns (drive frequency, omega) pairs suitable for polyline export.
    """
    points = []
    for r, f in enumerate(chi_map.row_axis):
        row = chi_map.chi[r]
        sign_change = np.where(np.signbit(row[:-1]) != np.signbit(row[1:]))[0]
        for i in sign_change:
            y0, y1 = row[i], row[i + 1]
            x0, x1 = chi_map.omega_axis[i], chi_map.omega_axis[i + 1]
            if y1 == y0:
                x = x0
            else:
                x = x0 - y0 * (x1 - x0) / (y1 - y0)
            points.append((float(f), float(x)))
    return points


def _moving_max(x: np.ndarray, width: int) -> np.ndarray:
    if width <= 1:
        return x
    pad = width // 2
    padded = np.concatenate([np.full(pad, -np.inf), x, np.full(width - 1 - pad, -np.inf)])
    view = np.lib.stride_tricks.sliding_window_view(padded, width)
    return view.max(axis=1)


def fit_lifetime(
    trace: TimeTrace,
    t_start: float,
    t_stop: float,
    env_window: float | None = None,
    floor: float = 0.0,
) -> LifetimeFit:
    """Exponential lifetime from a log-linear fit of the signal envelope.

    The envelope is a moving maximum whose width should cover one beat
    period of the carrier (default: 20 samples). Returns the decay time,
    the fitted prefactor, and the RMS residual in log space.
    """
    if trace.kind != "amplitude":
        raise ConfigError("fit_lifetime needs an amplitude trace")
    t = trace.times
    sel = (t >= t_start) & (t <= t_stop)
    if sel.sum() < 10:
        raise ConfigError("fit window must contain at least 10 samples")
    y = trace.samples[sel]
    tw = t[sel]
    width = 20 if env_window is None else max(1, int(round(env_window / trace.dt)))
    env = _moving_max(y, width) - floor
    if np.any(env <= 0):
        raise NumericsError("non-positive envelope samples after floor subtraction")
    logy = np.log(env)
    slope, icept = np.polyfit(tw - tw[0], logy, 1)
    if slope >= 0:
        raise NumericsError("envelope does not decay; lifetime undefined")
    fitted = slope * (tw - tw[0]) + icept
    residual = float(np.sqrt(np.mean((logy - fitted) ** 2)))
    return LifetimeFit(tau=-1.0 / slope, amplitude=float(np.exp(icept)), residual=residual)


def _half_sinc_root() -> float:
    # Root of sin(x) = x/2 on (pi/2, pi), by bisection.
    lo, hi = 1.5, 2.5
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if math.sin(mid) - 0.5 * mid > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


_HALF_SINC_ROOT = _half_sinc_root()


def pulse_bandwidth(duration: float) -> float:
    """FWHM of the amplitude spectrum of a rectangular pulse, in Hz."""
    if duration <= 0:
        raise ConfigError("duration must be > 0")
    return 2.0 * _HALF_SINC_ROOT / (math.pi * duration)


def diff_map(a: Spectrogram, b: Spectrogram) -> Spectrogram:
    """Elementwise a - b for maps on identical axes."""
    if not (
        np.array_equal(a.row_axis, b.row_axis)
        and np.array_equal(a.col_axis, b.col_axis)
    ):
        raise ConfigError("diff_map requires identical axes")
    return Spectrogram(
        row_axis=a.row_axis,
        col_axis=a.col_axis,
        values=a.values - b.values,
        scale=a.scale,
        col_unit=a.col_unit,
        pulse_off_index=a.pulse_off_index,
        meta={"sources": [a.meta.get("name", "a"), b.meta.get("name", "b")]},
    )


def mean_driven_response(spectrogram: Spectrogram) -> Series:
    """Per-row mean of the in-pulse columns."""
    if spectrogram.pulse_off_index is None:
        raise ConfigError("mean_driven_response requires pulse_off_index")
    vals = spectrogram.values[:, : spectrogram.pulse_off_index].mean(axis=1)
    return Series(
        x=spectrogram.row_axis,
        y=vals,
        name="mean_driven_response",
        x_unit="Hz",
        y_unit="arb",
    )
