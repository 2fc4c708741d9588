"""Presentation-only rendering of maps and linecuts (PNG or SVG)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .analysis import ChiMap, CorrelationMap, Series, Spectrogram
from .errors import ConfigError

# Fixed hash salt so SVG output is byte-identical across renders.
plt.rcParams["svg.hashsalt"] = "tdspec"


def _axis_label(name: str, unit: str) -> str:
    return f"{name} ({unit})"


def _scaled(axis: np.ndarray, unit: str) -> tuple[np.ndarray, str]:
    if unit == "Hz":
        return axis / 1e9, "GHz"
    if unit == "s":
        return axis * 1e9, "ns"
    return axis, unit


def render_heatmap(
    obj,
    path: str | Path,
    colormap: str = "viridis",
    clip_percentile: float | None = None,
    log: bool = False,
    freq_markers: tuple[float, ...] = (),
    bandwidth_hz: float | None = None,
) -> Path:
    """Render a 2-D dataset as a labeled heatmap; never mutates the data.

    Optional overlays: a dashed line at the pulse-off time, vertical dashed
    markers at given frequencies, and a bar of width `bandwidth_hz`.
    """
    if isinstance(obj, Spectrogram):
        rows, cols, values = obj.row_axis, obj.col_axis, obj.values
        col_unit = obj.col_unit
        pulse_off = (
            None if obj.pulse_off_index is None else obj.col_axis[obj.pulse_off_index]
        )
    elif isinstance(obj, CorrelationMap):
        rows, cols, values = obj.row_axis, obj.lag_axis, obj.g2
        col_unit = "s"
        pulse_off = None
    elif isinstance(obj, ChiMap):
        rows, cols, values = obj.row_axis, obj.omega_axis, obj.chi
        col_unit = "Hz"
        pulse_off = None
    else:
        raise ConfigError(f"cannot render {type(obj).__name__} as a heatmap")
    if values.size == 0:
        raise ConfigError("empty map")

    data = values
    if log:
        floor = 1e-6 * np.abs(data).max() or np.finfo(float).tiny
        data = np.log10(np.abs(data) + floor)
    vmin = vmax = None
    if clip_percentile is not None:
        lo = 100.0 - clip_percentile
        vmin, vmax = np.percentile(data, [lo, clip_percentile])

    x, x_unit = _scaled(cols, col_unit)
    y, y_unit = _scaled(rows, "Hz")
    fig, ax = plt.subplots(figsize=(7, 4.5))
    mesh = ax.pcolormesh(x, y, data, cmap=colormap, vmin=vmin, vmax=vmax, shading="nearest")
    fig.colorbar(mesh, ax=ax, label="log10 value" if log else "value")
    ax.set_xlabel(_axis_label("time" if col_unit == "s" else "frequency", x_unit))
    ax.set_ylabel(_axis_label("drive frequency", y_unit))
    if pulse_off is not None:
        xo = pulse_off * 1e9 if col_unit == "s" else pulse_off
        ax.axvline(xo, color="white", linestyle="--", linewidth=1)
    for f in freq_markers:
        ax.axhline(f / 1e9, color="white", linestyle="--", linewidth=0.8)
    if bandwidth_hz is not None and col_unit == "Hz":
        x0 = x[0] + 0.02 * (x[-1] - x[0])
        y0 = y[0] + 0.95 * (y[-1] - y[0])
        ax.plot([x0, x0 + bandwidth_hz / 1e9], [y0, y0], color="white", linewidth=2)
    out = Path(path)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out


def render_series(series: Series, path: str | Path, logy: bool = False) -> Path:
    """Render a 1-D series as a linecut plot."""
    x, x_unit = _scaled(series.x, series.x_unit)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(x, series.y, lw=1)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(_axis_label("x", x_unit))
    ax.set_ylabel(series.y_unit)
    ax.set_title(series.name)
    out = Path(path)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out
