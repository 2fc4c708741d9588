"""JSON run configurations: schema validation and object construction.

A run config fully describes an ensemble, a drive pulse, and (optionally)
a sweep plan and Floquet settings. Every frequency is in Hz and every time
in seconds; field names carry the unit suffix to keep files self-describing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema

from .errors import ConfigError
from .model import DisorderSpec, DrivePulse, EnsembleSpec, GainTable, TlsParams
from .sweep import SweepPlan

DEFAULT_ASSIGN = "epsilon"


def _config_schema() -> dict:
    text = resources.files("tdspec.schemas").joinpath("run_config.schema.json").read_text()
    return json.loads(text)


_SCHEMA = _config_schema()


@dataclass(frozen=True)
class RunConfig:
    spec: EnsembleSpec
    pulse: DrivePulse
    plan: SweepPlan | None
    floquet_m_max: int | None
    floquet_tol: float | None
    raw: dict

    def echo(self) -> dict:
        """Resolved numeric settings, including defaults the file omitted."""
        out = {
            "n_defects": self.spec.n,
            "gamma_hz": self.spec.gamma,
            "carrier_hz": self.pulse.carrier,
            "amplitude_hz": self.pulse.amplitude,
            "duration_s": self.pulse.duration,
            "envelope": self.pulse.envelope,
        }
        if self.plan is not None:
            out["sweep"] = self.plan.echo()
        if self.floquet_m_max is not None:
            out["floquet_m_max"] = self.floquet_m_max
        if self.floquet_tol is not None:
            out["floquet_convergence_tol_hz"] = self.floquet_tol
        return out


def _build_disorder(d: dict) -> DisorderSpec:
    return DisorderSpec(
        epsilon_range=tuple(d["freq_range_hz"]),
        j_range=tuple(d["j_range_hz"]),
        seed=int(d["seed"]),
        assign=d.get("assign", DEFAULT_ASSIGN),
    )


def _build_ensemble(e: dict) -> EnsembleSpec:
    disorder = _build_disorder(e["disorder"]) if "disorder" in e else None
    if "defects" in e:
        defects = tuple(
            TlsParams(
                epsilon=d.get("epsilon_hz", 0.0),
                delta=d.get("delta_hz", 0.0),
                dipole=d.get("dipole", 1.0),
            )
            for d in e["defects"]
        )
    elif "count" in e:
        if disorder is None:
            raise ConfigError("ensemble.count requires ensemble.disorder")
        # Placeholder wells at the center of the draw range; the disorder
        # sampler replaces them before any evolution runs.
        mid = 0.5 * (disorder.epsilon_range[0] + disorder.epsilon_range[1])
        if disorder.assign == "delta":
            template = TlsParams(epsilon=0.0, delta=mid)
        else:
            template = TlsParams(epsilon=mid, delta=0.0)
        defects = (template,) * int(e["count"])
    else:
        raise ConfigError("ensemble needs either defects or count")
    kwargs = {}
    if "max_defects" in e:
        kwargs["max_defects"] = int(e["max_defects"])
    return EnsembleSpec(
        defects=defects,
        couplings=e.get("couplings_hz"),
        gamma=e.get("gamma_hz", 0.0),
        disorder=disorder,
        **kwargs,
    )


def _build_pulse(p: dict) -> DrivePulse:
    gain = None
    if "gain_table" in p:
        gain = GainTable(
            freqs=p["gain_table"]["freqs_hz"], scales=p["gain_table"]["scales"]
        )
    return DrivePulse(
        carrier=p["carrier_hz"],
        amplitude=p["amplitude_hz"],
        duration=p["duration_s"],
        envelope=p.get("envelope", "square-cosine"),
        gain_table=gain,
    )


def _build_plan(s: dict, spec: EnsembleSpec, pulse: DrivePulse) -> SweepPlan:
    return SweepPlan(
        spec=spec,
        pulse_template=pulse,
        freq_start=s["freq_start_hz"],
        freq_stop=s["freq_stop_hz"],
        freq_count=int(s["freq_count"]),
        durations=tuple(s.get("durations_s", ())),
        t_end=s.get("t_end_s"),
        realizations=int(s.get("realizations", 1)),
        base_seed=s.get("base_seed"),
        dt=s.get("dt_s"),
        record_stride=s.get("record_stride"),
        record_dipole=s.get("record_dipole", False),
    )


def parse_config(data: dict) -> RunConfig:
    """Validate a config dict against the schema and build typed objects."""
    try:
        jsonschema.validate(data, _SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid config: {exc.message}") from exc
    spec = _build_ensemble(data["ensemble"])
    pulse = _build_pulse(data["pulse"])
    plan = None
    if "sweep" in data:
        plan = _build_plan(data["sweep"], spec, pulse)
    flo = data.get("floquet", {})
    return RunConfig(
        spec=spec,
        pulse=pulse,
        plan=plan,
        floquet_m_max=flo.get("m_max"),
        floquet_tol=flo.get("convergence_tol_hz"),
        raw=data,
    )


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return parse_config(data)
