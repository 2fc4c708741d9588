"""Command-line interface.

Subcommands map onto the library one-to-one: `simulate` runs sweep plans,
`floquet` computes quasi-energy bands, `analyze` post-processes datasets,
`waveguide` does mode math, `render` draws figures, `selftest` runs the
internal invariant checks. Exit codes: 0 success, 2 configuration error,
3 dataset/io error, 4 numerical failure, 64 usage error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

from . import analysis, datasets, floquet, sweep, waveguide
from .config import load_config
from .errors import ConfigError, DatasetError, NumericsError, SweepPointError
from .selftest import run_selftest

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERIC = 4
EXIT_USAGE = 64

WORKERS_ENV = "TDSPEC_WORKERS"

# Metadata keys that vary run-to-run and must not reach output datasets.
VOLATILE_META = ("per_point_walltime_s",)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}")


def _scrub_meta(meta: dict) -> dict:
    return {k: v for k, v in meta.items() if k not in VOLATILE_META}


def _provenance(extra: dict | None = None) -> dict:
    prov = {"tool": "tdspec"}
    if extra:
        prov.update(extra)
    return prov


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    if cfg.plan is None:
        raise ConfigError("config has no sweep section; nothing to simulate")
    plan = cfg.plan
    if args.signal == "dipole" and not plan.record_dipole:
        plan = dataclasses.replace(plan, record_dipole=True)
    if args.dry_run:
        echo = cfg.echo()
        echo["sweep"] = plan.echo()
        print(
            json.dumps(
                {"plan": echo, "workers": args.workers, "signal": args.signal}, indent=1
            )
        )
        return EXIT_OK
    results = sweep.run_duration_series(plan, workers=args.workers)
    out = Path(args.out)
    single = len(results) == 1
    for res, duration in zip(results, plan.durations):
        sgram = res.to_spectrogram(signal=args.signal)
        sgram.meta = _scrub_meta(sgram.meta)
        dest = out if single else out / f"duration_{duration * 1e9:g}ns"
        datasets.write_dataset(
            sgram, dest, force=args.force, provenance=_provenance({"defaults": cfg.echo()})
        )
        print(f"wrote {dest}")
    return EXIT_OK


def _cmd_floquet(args) -> int:
    cfg = load_config(args.config)
    if cfg.plan is None:
        raise ConfigError("config has no sweep section; no frequency axis")
    m_max = args.m_max or cfg.floquet_m_max or floquet.DEFAULT_M_MAX
    tol = cfg.floquet_tol or floquet.DEFAULT_CONVERGENCE_TOL
    if args.dry_run:
        print(json.dumps({"plan": cfg.echo(), "m_max": m_max}, indent=1))
        return EXIT_OK
    result = floquet.sweep_quasi_energies(
        cfg.spec, cfg.pulse, cfg.plan.freq_axis, m_max=m_max, tol=tol
    )
    datasets.write_dataset(
        result, args.out, force=args.force, provenance=_provenance({"defaults": cfg.echo()})
    )
    print(f"wrote {args.out}")
    return EXIT_OK


def _load_spectrogram(path: str) -> analysis.Spectrogram:
    obj = datasets.read_dataset(path)
    if not isinstance(obj, analysis.Spectrogram):
        raise DatasetError(f"{path}: expected a spectrogram dataset")
    return obj


def _window_name(flag: str) -> str:
    return flag.replace("-", "_")


def _cmd_analyze(args) -> int:
    if args.analysis == "fft":
        sgram = _load_spectrogram(args.input)
        out = analysis.ringdown_fft(
            sgram,
            window=_window_name(args.window),
            log_input=args.log,
            taper="none" if args.no_taper else "hann",
        )
        datasets.write_dataset(out, args.out, force=args.force, provenance=_provenance())
    elif args.analysis == "g2":
        sgram = _load_spectrogram(args.input)
        out = analysis.g2_map(
            sgram, max_lag=args.max_lag_ns * 1e-9, window=_window_name(args.window)
        )
        datasets.write_dataset(out, args.out, force=args.force, provenance=_provenance())
    elif args.analysis == "chi":
        corr = datasets.read_dataset(args.input)
        if not isinstance(corr, analysis.CorrelationMap):
            raise DatasetError(f"{args.input}: expected a correlation dataset")
        out = analysis.chi_imag(corr, two_sided=args.two_sided)
        datasets.write_dataset(out, args.out, force=args.force, provenance=_provenance())
    elif args.analysis == "lifetime":
        obj = datasets.read_dataset(args.input)
        if not isinstance(obj, analysis.TimeTrace):
            raise DatasetError(f"{args.input}: expected a time-trace dataset")
        if obj.kind == "iq":
            obj = analysis.homodyne_amplitude(obj)
        fit = analysis.fit_lifetime(
            obj,
            t_start=args.t_start_ns * 1e-9,
            t_stop=args.t_stop_ns * 1e-9,
            env_window=None if args.env_window_ns is None else args.env_window_ns * 1e-9,
            floor=args.floor,
        )
        print(f"tau_ns {fit.tau * 1e9:.6g}")
        print(f"amplitude {fit.amplitude:.6g}")
        print(f"log_rms_residual {fit.residual:.6g}")
    elif args.analysis == "diff":
        a = _load_spectrogram(args.input_a)
        b = _load_spectrogram(args.input_b)
        out = analysis.diff_map(a, b)
        datasets.write_dataset(out, args.out, force=args.force, provenance=_provenance())
    elif args.analysis == "mean-driven":
        sgram = _load_spectrogram(args.input)
        out = analysis.mean_driven_response(sgram)
        datasets.write_dataset(out, args.out, force=args.force, provenance=_provenance())
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown analysis {args.analysis!r}")
    if args.analysis != "lifetime":
        print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_waveguide(args) -> int:
    if args.wg == "modes":
        geom = waveguide.WaveguideGeometry(a=args.a_mm * 1e-3, b=args.b_mm * 1e-3)
        for mode in waveguide.mode_cutoffs(geom, args.m_max, args.n_max):
            print(f"TE{mode.m}{mode.n} {mode.f_c / 1e9:.3f} GHz")
    elif args.wg == "beta":
        geom = waveguide.WaveguideGeometry(a=args.a_mm * 1e-3, b=args.b_mm * 1e-3)
        beta, evan = waveguide.propagation_constant(
            geom, args.freq_ghz * 1e9, args.m, args.n
        )
        kind = "evanescent |kappa|" if evan else "propagating beta"
        print(f"{kind} {beta:.6g} rad/m")
    elif args.wg == "flatten":
        profile = waveguide.read_field_profile(args.profile, target=args.target)
        table = waveguide.flatten_gain(profile)
        waveguide.write_gain_table(table, args.out)
        print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_render(args) -> int:
    from . import render

    obj = datasets.read_dataset(args.input)
    if isinstance(obj, analysis.Series):
        render.render_series(obj, args.out, logy=args.log)
    else:
        render.render_heatmap(
            obj,
            args.out,
            colormap=args.colormap,
            clip_percentile=args.clip_percentile,
            log=args.log,
        )
    print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_selftest(args) -> int:
    failures = run_selftest()
    return EXIT_OK if failures == 0 else EXIT_NUMERIC


def build_parser() -> _Parser:
    parser = _Parser(prog="tdspec", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a sweep plan into spectrogram datasets")
    sim.add_argument("--config", required=True)
    sim.add_argument("--out", required=True)
    sim.add_argument("--workers", type=int, default=None)
    sim.add_argument("--signal", choices=["population", "dipole"], default="population")
    sim.add_argument("--dry-run", action="store_true")
    sim.add_argument("--force", action="store_true")
    sim.set_defaults(func=_cmd_simulate)

    flo = sub.add_parser("floquet", help="quasi-energy bands over the sweep axis")
    flo.add_argument("--config", required=True)
    flo.add_argument("--out", required=True)
    flo.add_argument("--m-max", type=int, default=None)
    flo.add_argument("--dry-run", action="store_true")
    flo.add_argument("--force", action="store_true")
    flo.set_defaults(func=_cmd_floquet)

    ana = sub.add_parser("analyze", help="post-process datasets")
    anasub = ana.add_subparsers(dest="analysis", required=True)

    fft = anasub.add_parser("fft", help="per-row ring-down spectrum")
    fft.add_argument("input")
    fft.add_argument("out")
    fft.add_argument("--window", choices=["full", "post-pulse"], default="full")
    fft.add_argument("--log", action="store_true", help="log-scale before transforming")
    fft.add_argument("--no-taper", action="store_true")
    fft.add_argument("--force", action="store_true")

    g2 = anasub.add_parser("g2", help="two-time intensity correlation")
    g2.add_argument("input")
    g2.add_argument("out")
    g2.add_argument("--max-lag-ns", type=float, required=True)
    g2.add_argument("--window", choices=["full", "post-pulse"], default="post-pulse")
    g2.add_argument("--force", action="store_true")

    chi = anasub.add_parser("chi", help="dissipative response from a correlation map")
    chi.add_argument("input")
    chi.add_argument("out")
    chi.add_argument("--two-sided", action="store_true")
    chi.add_argument("--force", action="store_true")

    lt = anasub.add_parser("lifetime", help="envelope decay fit of a time trace")
    lt.add_argument("input")
    lt.add_argument("--t-start-ns", type=float, required=True)
    lt.add_argument("--t-stop-ns", type=float, required=True)
    lt.add_argument("--env-window-ns", type=float, default=None)
    lt.add_argument("--floor", type=float, default=0.0)

    diff = anasub.add_parser("diff", help="difference of two maps on shared axes")
    diff.add_argument("input_a")
    diff.add_argument("input_b")
    diff.add_argument("out")
    diff.add_argument("--force", action="store_true")

    md = anasub.add_parser("mean-driven", help="per-row mean of the in-pulse columns")
    md.add_argument("input")
    md.add_argument("out")
    md.add_argument("--force", action="store_true")
    ana.set_defaults(func=_cmd_analyze)

    wg = sub.add_parser("waveguide", help="rectangular waveguide mode math")
    wgsub = wg.add_subparsers(dest="wg", required=True)

    modes = wgsub.add_parser("modes", help="cutoff frequencies")
    modes.add_argument("--a-mm", type=float, required=True)
    modes.add_argument("--b-mm", type=float, required=True)
    modes.add_argument("--m-max", type=int, default=2)
    modes.add_argument("--n-max", type=int, default=2)

    beta = wgsub.add_parser("beta", help="propagation constant at a frequency")
    beta.add_argument("--a-mm", type=float, required=True)
    beta.add_argument("--b-mm", type=float, required=True)
    beta.add_argument("--freq-ghz", type=float, required=True)
    beta.add_argument("--m", type=int, default=1)
    beta.add_argument("--n", type=int, default=0)

    flat = wgsub.add_parser("flatten", help="gain table that flattens a field profile")
    flat.add_argument("profile")
    flat.add_argument("out")
    flat.add_argument("--target", type=float, default=1.0)
    wg.set_defaults(func=_cmd_waveguide)

    ren = sub.add_parser("render", help="draw a dataset as a figure")
    ren.add_argument("input")
    ren.add_argument("out")
    ren.add_argument("--colormap", default="viridis")
    ren.add_argument("--clip-percentile", type=float, default=None)
    ren.add_argument("--log", action="store_true")
    ren.set_defaults(func=_cmd_render)

    st = sub.add_parser("selftest", help="run the internal invariant checks")
    st.set_defaults(func=_cmd_selftest)
    return parser


def dispatch(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if getattr(args, "workers", None) is None and hasattr(args, "workers"):
            args.workers = _default_workers()
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DatasetError, OSError) as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (NumericsError, SweepPointError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main() -> None:
    raise SystemExit(dispatch())
