"""Deterministic drive-frequency and pulse-duration sweeps.

Sweep points are independent; they may run on any number of worker
processes, and results are always assembled in frequency order so the output
is byte-identical regardless of scheduling.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import lindblad
from .analysis import Spectrogram
from .errors import ConfigError, SweepPointError
from .model import DrivePulse, EnsembleSpec, sample_disorder

DEFAULT_RINGDOWN_WINDOW = 600e-9  # seconds of post-pulse evolution


@dataclass(frozen=True)
class SweepPlan:
    spec: EnsembleSpec
    pulse_template: DrivePulse
    freq_start: float
    freq_stop: float
    freq_count: int
    durations: tuple[float, ...] = ()
    t_end: float | None = None
    realizations: int = 1
    base_seed: int | None = None
    dt: float | None = None
    record_stride: int | None = None
    record_dipole: bool = False

    def __post_init__(self):
        if self.freq_count < 1:
            raise ConfigError("freq_count must be >= 1")
        if self.freq_count > 1 and not (self.freq_start < self.freq_stop):
            raise ConfigError("freq axis requires start < stop")
        if self.realizations < 1:
            raise ConfigError("realizations must be >= 1")
        durations = tuple(self.durations) or (self.pulse_template.duration,)
        object.__setattr__(self, "durations", durations)
        t_end = self.t_end
        if t_end is None:
            t_end = max(durations) + DEFAULT_RINGDOWN_WINDOW
        if t_end < max(durations):
            raise ConfigError("t_end must cover the longest pulse")
        object.__setattr__(self, "t_end", t_end)

    @property
    def freq_axis(self) -> np.ndarray:
        if self.freq_count == 1:
            return np.array([self.freq_start])
        return np.linspace(self.freq_start, self.freq_stop, self.freq_count)

    def echo(self) -> dict:
        return {
            "freq_start_hz": self.freq_start,
            "freq_stop_hz": self.freq_stop,
            "freq_count": self.freq_count,
            "durations_s": list(self.durations),
            "t_end_s": self.t_end,
            "realizations": self.realizations,
            "base_seed": self.base_seed,
            "dt_s": self.dt,
            "record_stride": self.record_stride,
            "record_dipole": self.record_dipole,
            "n_defects": self.spec.n,
            "gamma_hz": self.spec.gamma,
            "amplitude_hz": self.pulse_template.amplitude,
        }


@dataclass
class SweepResult:
    freq_axis: np.ndarray  # Hz
    time_axis: np.ndarray  # s
    population_map: np.ndarray  # (freq, time)
    dipole_map: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    def pulse_off_index(self) -> int | None:
        return self.metadata.get("pulse_off_index")

    def to_spectrogram(self, signal: str = "population") -> Spectrogram:
        if signal == "population":
            values = self.population_map
        elif signal == "dipole":
            if self.dipole_map is None:
                raise ConfigError("sweep did not record the dipole")
            values = self.dipole_map
        else:
            raise ConfigError("signal must be 'population' or 'dipole'")
        meta = dict(self.metadata)
        meta["signal"] = signal
        return Spectrogram(
            row_axis=self.freq_axis,
            col_axis=self.time_axis,
            values=values,
            scale="linear",
            col_unit="s",
            pulse_off_index=self.pulse_off_index(),
            meta=meta,
        )


def _run_point(args) -> tuple[int, np.ndarray, np.ndarray | None, np.ndarray, float]:
    index, spec, pulse, t_end, dt, stride, record_dipole = args
    t0 = time.perf_counter()
    res = lindblad.evolve(
        spec, pulse, t_end=t_end, dt=dt, record_stride=stride,
        record_dipole=record_dipole,
    )
    return index, res.population, res.dipole, res.times, time.perf_counter() - t0


def _concrete_spec(plan: SweepPlan, realization: int = 0) -> EnsembleSpec:
    if plan.spec.disorder is None:
        return plan.spec
    base = plan.spec.disorder.seed if plan.base_seed is None else plan.base_seed
    return sample_disorder(plan.spec, seed=base + realization)


def run_frequency_sweep(
    plan: SweepPlan,
    duration: float | None = None,
    spec: EnsembleSpec | None = None,
    workers: int = 1,
) -> SweepResult:
    """Evolve the ensemble once per drive frequency and stack the rows.

    Any point failure aborts the sweep and names the offending frequency.
    """
    if spec is None:
        spec = _concrete_spec(plan)
    if duration is None:
        duration = plan.durations[0]
    freqs = plan.freq_axis
    # One shared step and stride for the whole sweep, sized for the highest
    # carrier, so every row lands on the same output grid.
    dt = plan.dt
    if dt is None:
        dt = 1.0 / (lindblad.DT_DIVISOR * float(freqs.max()))
    stride = plan.record_stride
    if stride is None:
        stride = max(1, int(lindblad.RECORD_INTERVAL / dt))
    tasks = []
    for i, f in enumerate(freqs):
        pulse = replace(plan.pulse_template, carrier=float(f), duration=duration)
        tasks.append((i, spec, pulse, plan.t_end, dt, stride, plan.record_dipole))

    rows: dict[int, np.ndarray] = {}
    dip_rows: dict[int, np.ndarray | None] = {}
    times = None
    walltimes = [0.0] * len(freqs)
    try:
        if workers <= 1:
            outputs = map(_run_point, tasks)
            for index, pop, dip, t, wall in outputs:
                rows[index] = pop
                dip_rows[index] = dip
                times = t
                walltimes[index] = wall
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                for index, pop, dip, t, wall in pool.map(_run_point, tasks):
                    rows[index] = pop
                    dip_rows[index] = dip
                    times = t
                    walltimes[index] = wall
    except Exception as exc:
        done = set(rows)
        failing = next(f for i, f in enumerate(freqs) if i not in done)
        raise SweepPointError(float(failing), exc) from exc

    pop_map = np.vstack([rows[i] for i in range(len(freqs))])
    dip_map = (
        np.vstack([dip_rows[i] for i in range(len(freqs))])
        if plan.record_dipole
        else None
    )
    dt_out = times[1] - times[0]
    metadata = {
        "plan": plan.echo(),
        "duration_s": duration,
        "pulse_off_index": int(round(duration / dt_out)),
        "per_point_walltime_s": walltimes,
        "defect_frequencies_hz": [
            float(np.hypot(d.epsilon, d.delta)) for d in spec.defects
        ],
    }
    return SweepResult(
        freq_axis=freqs,
        time_axis=times,
        population_map=pop_map,
        dipole_map=dip_map,
        metadata=metadata,
    )


def run_duration_series(plan: SweepPlan, workers: int = 1) -> list[SweepResult]:
    """One frequency sweep per pulse duration.

    Disorder realizations are sampled once, before the duration loop, so the
    same realization (same seeds) is reused across durations and the pulse
    length is the only variable.
    """
    if not plan.durations:
        raise ConfigError("durations must be non-empty")
    specs = [_concrete_spec(plan, r) for r in range(plan.realizations)]
    out = []
    for duration in plan.durations:
        per_real = [
            run_frequency_sweep(plan, duration=duration, spec=s, workers=workers)
            for s in specs
        ]
        result = per_real[0] if len(per_real) == 1 else average_realizations(per_real)
        result.metadata["realization_seeds"] = (
            None
            if plan.spec.disorder is None
            else [
                (plan.base_seed or plan.spec.disorder.seed) + r
                for r in range(plan.realizations)
            ]
        )
        out.append(result)
    return out


def average_realizations(results: list[SweepResult]) -> SweepResult:
    """Pointwise mean of population maps sharing the same axes."""
    if not results:
        raise ConfigError("no results to average")
    first = results[0]
    for r in results[1:]:
        if not (
            np.array_equal(r.freq_axis, first.freq_axis)
            and np.array_equal(r.time_axis, first.time_axis)
        ):
            raise ConfigError("cannot average results with mismatched axes")
    mean = np.mean([r.population_map for r in results], axis=0)
    dip = None
    if all(r.dipole_map is not None for r in results):
        dip = np.mean([r.dipole_map for r in results], axis=0)
    metadata = dict(first.metadata)
    metadata["averaged_over"] = len(results)
    return SweepResult(
        freq_axis=first.freq_axis,
        time_axis=first.time_axis,
        population_map=mean,
        dipole_map=dip,
        metadata=metadata,
    )
