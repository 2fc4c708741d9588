"""Dataset persistence: JSON manifest plus raw little-endian binary arrays.

A dataset is a directory holding `manifest.json` and one file per array.
Binary layout is headerless row-major IEEE-754 float64 (`.f64`) or
interleaved re/im float64 pairs (`.c128`). The format is deliberately
trivial to parse from any language.
"""

from __future__ import annotations

import csv
import json
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .analysis import ChiMap, CorrelationMap, Series, Spectrogram, TimeTrace
from .errors import (
    DatasetError,
    DtypeMismatch,
    SchemaViolation,
    ShapeMismatch,
    UnsupportedVersion,
)
from .floquet import QuasiEnergySweep

MANIFEST_VERSION = 1

_DTYPES = {"f64": np.dtype("<f8"), "c128": np.dtype("<c16")}


def _manifest_schema() -> dict:
    text = resources.files("tdspec.schemas").joinpath("manifest.schema.json").read_text()
    return json.loads(text)


_SCHEMA = _manifest_schema()


def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_json_safe(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _axis(name: str, unit: str, values: np.ndarray) -> dict:
    return {"name": name, "unit": unit, "values": [float(v) for v in values]}


def _uniform_axis(name: str, unit: str, start: float, step: float, count: int) -> dict:
    return {"name": name, "unit": unit, "start": start, "step": step, "count": count}


def _describe(obj) -> tuple[str, list, dict, dict]:
    """Return (kind, axes, arrays-by-name, provenance extras) for an object."""
    if isinstance(obj, TimeTrace):
        dtype = "c128" if obj.kind == "iq" else "f64"
        return (
            "time_trace",
            [_uniform_axis("time", "s", obj.t0, obj.dt, obj.samples.size)],
            {"samples": (obj.samples, dtype)},
            {"trace_kind": obj.kind},
        )
    if isinstance(obj, Spectrogram):
        return (
            "spectrogram",
            [
                _axis("drive_freq", "Hz", obj.row_axis),
                _axis("col", obj.col_unit, obj.col_axis),
            ],
            {"values": (obj.values, "f64")},
            {
                "scale": obj.scale,
                "pulse_off_index": obj.pulse_off_index,
                "meta": _json_safe(obj.meta),
            },
        )
    if isinstance(obj, CorrelationMap):
        arrays = {"g2": (obj.g2, "f64")}
        if obj.raw is not None:
            arrays["raw"] = (obj.raw, "f64")
        if obj.row_mask is not None:
            arrays["row_mask"] = (obj.row_mask.astype(float), "f64")
        return (
            "g2_map",
            [_axis("drive_freq", "Hz", obj.row_axis), _axis("lag", "s", obj.lag_axis)],
            arrays,
            {"meta": _json_safe(obj.meta)},
        )
    if isinstance(obj, ChiMap):
        return (
            "chi_map",
            [
                _axis("drive_freq", "Hz", obj.row_axis),
                _axis("omega", "Hz", obj.omega_axis),
            ],
            {"chi": (obj.chi, "f64")},
            {"meta": _json_safe(obj.meta)},
        )
    if isinstance(obj, QuasiEnergySweep):
        return (
            "floquet_spectrum",
            [_axis("drive_freq", "Hz", obj.drive_freqs)],
            {"quasi_energies": (obj.energies, "f64")},
            {"harmonics": obj.harmonics},
        )
    if isinstance(obj, Series):
        return (
            "series",
            [_axis("x", obj.x_unit, obj.x)],
            {"y": (obj.y, "f64")},
            {"name": obj.name, "y_unit": obj.y_unit},
        )
    raise DatasetError(f"object of type {type(obj).__name__} is not exportable")


def write_dataset(obj, path: str | Path, force: bool = False, provenance: dict | None = None) -> dict:
    """Write an exportable object as a dataset directory; returns the manifest."""
    path = Path(path)
    if path.exists() and not force:
        raise DatasetError(f"{path} already exists (pass force=True to overwrite)")
    kind, axes, arrays, extra = _describe(obj)
    path.mkdir(parents=True, exist_ok=True)
    array_entries = []
    for name, (data, dtype) in arrays.items():
        data = np.asarray(data)
        fname = f"{name}.{dtype}"
        raw = np.ascontiguousarray(data).astype(_DTYPES[dtype], copy=False)
        (path / fname).write_bytes(raw.tobytes())
        array_entries.append(
            {"name": name, "file": fname, "shape": list(data.shape), "dtype": dtype}
        )
    prov = dict(extra)
    if provenance:
        prov.update(_json_safe(provenance))
    manifest = {
        "version": MANIFEST_VERSION,
        "kind": kind,
        "axes": axes,
        "arrays": array_entries,
        "provenance": prov,
    }
    (path / "manifest.json").write_text(json.dumps(manifest, indent=1))
    return manifest


def _axis_values(axis: dict) -> np.ndarray:
    if "values" in axis:
        return np.asarray(axis["values"], dtype=float)
    for key in ("start", "step", "count"):
        if key not in axis:
            raise SchemaViolation(f"axis {axis.get('name')} needs values or start/step/count")
    return axis["start"] + axis["step"] * np.arange(axis["count"])


def _load_array(path: Path, entry: dict) -> np.ndarray:
    dtype = _DTYPES.get(entry["dtype"])
    if dtype is None:
        raise DtypeMismatch(f"unsupported dtype {entry['dtype']!r}")
    fpath = path / entry["file"]
    if not fpath.exists():
        raise DatasetError(f"missing array file {fpath}")
    raw = fpath.read_bytes()
    shape = tuple(entry["shape"])
    expected = int(np.prod(shape)) * dtype.itemsize
    if len(raw) != expected:
        raise ShapeMismatch(
            f"{fpath}: {len(raw)} bytes on disk, shape {shape} needs {expected}"
        )
    return np.frombuffer(raw, dtype=dtype).reshape(shape).copy()


def read_dataset(path: str | Path):
    """Reconstruct the typed object stored at `path`.

    Unknown manifest fields are ignored (forward compatibility); an unknown
    version is an error. Schema, shape and dtype violations are reported
    distinctly.
    """
    path = Path(path)
    mpath = path / "manifest.json"
    if not mpath.exists():
        raise DatasetError(f"no manifest.json under {path}")
    manifest = json.loads(mpath.read_text())
    try:
        jsonschema.validate(manifest, _SCHEMA)
    except jsonschema.ValidationError as exc:
        raise SchemaViolation(f"{mpath}: {exc.message}") from exc
    if manifest["version"] != MANIFEST_VERSION:
        raise UnsupportedVersion(
            f"manifest version {manifest['version']} not supported (expected {MANIFEST_VERSION})"
        )
    axes = {a["name"]: a for a in manifest["axes"]}
    arrays = {a["name"]: _load_array(path, a) for a in manifest["arrays"]}
    prov = manifest.get("provenance", {})
    kind = manifest["kind"]

    if kind == "time_trace":
        t = axes["time"]
        samples = arrays["samples"]
        return TimeTrace(
            t0=t["start"], dt=t["step"], kind=prov.get("trace_kind", "amplitude"), samples=samples
        )
    if kind == "spectrogram":
        col = axes["col"]
        poi = prov.get("pulse_off_index")
        return Spectrogram(
            row_axis=_axis_values(axes["drive_freq"]),
            col_axis=_axis_values(col),
            values=arrays["values"],
            scale=prov.get("scale", "linear"),
            col_unit=col["unit"],
            pulse_off_index=None if poi is None else int(poi),
            meta=prov.get("meta", {}),
        )
    if kind == "g2_map":
        mask = arrays.get("row_mask")
        return CorrelationMap(
            row_axis=_axis_values(axes["drive_freq"]),
            lag_axis=_axis_values(axes["lag"]),
            g2=arrays["g2"],
            raw=arrays.get("raw"),
            row_mask=None if mask is None else mask.astype(bool),
            meta=prov.get("meta", {}),
        )
    if kind == "chi_map":
        return ChiMap(
            row_axis=_axis_values(axes["drive_freq"]),
            omega_axis=_axis_values(axes["omega"]),
            chi=arrays["chi"],
            meta=prov.get("meta", {}),
        )
    if kind == "floquet_spectrum":
        return QuasiEnergySweep(
            drive_freqs=_axis_values(axes["drive_freq"]),
            energies=arrays["quasi_energies"],
            harmonics=int(prov.get("harmonics", 0)),
        )
    if kind == "series":
        x = axes["x"]
        return Series(
            x=_axis_values(x),
            y=arrays["y"],
            name=prov.get("name", "series"),
            x_unit=x["unit"],
            y_unit=prov.get("y_unit", "arb"),
        )
    raise SchemaViolation(f"unknown dataset kind {kind!r}")


def import_iq_csv(path: str | Path, dt: float | None = None, t0: float = 0.0) -> TimeTrace:
    """Load homodyne quadratures from CSV with columns `i, q` or `t, i, q`.

    An explicit time column overrides dt/t0 and must be uniform to within
    1e-6 relative jitter.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DatasetError(f"{path}: empty file")
        cols = [c.strip().lower() for c in header]
        if cols[:3] == ["t", "i", "q"]:
            has_t = True
        elif cols[:2] == ["i", "q"]:
            has_t = False
        else:
            raise DatasetError(f"{path}: expected header 'i, q' or 't, i, q'")
        ts, iq = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                vals = [float(v) for v in row]
                if has_t:
                    ts.append(vals[0])
                    iq.append(complex(vals[1], vals[2]))
                else:
                    iq.append(complex(vals[0], vals[1]))
            except (ValueError, IndexError) as exc:
                raise DatasetError(f"{path}:{lineno}: malformed row") from exc
    if not iq:
        raise DatasetError(f"{path}: no samples")
    if has_t:
        t = np.asarray(ts)
        if t.size < 2:
            raise DatasetError(f"{path}: need at least two samples to infer dt")
        diffs = np.diff(t)
        step = float(np.mean(diffs))
        if step <= 0 or np.any(np.abs(diffs - step) > 1e-6 * abs(step)):
            raise DatasetError(f"{path}: non-uniform timestamps")
        dt = step
        t0 = float(t[0])
    elif dt is None:
        raise DatasetError("dt required when the CSV has no time column")
    return TimeTrace(t0=t0, dt=dt, kind="iq", samples=np.asarray(iq))
