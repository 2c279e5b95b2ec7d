"""Command-line interface.

Exit codes: 0 ok, 1 invalid channel, 2 parse error, 3 theorem-violation
diagnostic.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from .builders import basis_state, build_channel, sample_disk
from .channel import QuantumChannel, channel_from_dict, validate
from .ensemble import EnsembleSpec, run_ensemble, write_samples_csv, write_stats_csv
from .errors import TheoremViolation
from .numerics import Tolerance
from .recurrence import quantization_verdict, return_series

EXIT_OK, EXIT_INVALID, EXIT_PARSE, EXIT_THEOREM = 0, 1, 2, 3


class ParseError(Exception):
    pass


class InvalidChannel(Exception):
    pass


def _load_json_arg(text: str):
    """Inline JSON, or the path of a JSON file."""
    try:
        if os.path.exists(text):
            with open(text) as fh:
                return json.load(fh)
        return json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(str(exc)) from exc


def _tolerance(args) -> Tolerance:
    kw = {}
    for flag, name in (("tol_rank", "eps_rank"), ("tol_check", "eps_check"),
                       ("tol_converge", "eps_converge")):
        value = getattr(args, flag, None)
        if value is not None:
            kw[name] = value
    try:
        return Tolerance(**kw)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def _load_channel(args, tol: Tolerance, require_valid: bool = True) -> QuantumChannel:
    if bool(args.channel) == bool(args.builder):
        raise ParseError("give exactly one of --channel or --builder")
    try:
        if args.channel:
            data = _load_json_arg(args.channel)
            channel = channel_from_dict(data, check=False)
        else:
            cfg = _load_json_arg(args.builder)
            if not isinstance(cfg, dict):
                raise ParseError("builder spec must be a JSON object")
            channel = build_channel(cfg, args.seed)
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"cannot build channel: {exc}") from exc
    if require_valid:
        report = validate(channel, tol)
        if not (report.trace_preserving and report.completely_positive):
            raise InvalidChannel(json.dumps(report.to_dict()))
    return channel


def _psi(args, channel) -> np.ndarray:
    if not 0 <= args.psi < channel.dim:
        raise ParseError(f"--psi {args.psi} outside 0..{channel.dim - 1}")
    return basis_state(channel.dim, args.psi)


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isinf(x)):
        return "inf"
    return repr(float(x))


# -- commands ----------------------------------------------------------------

def cmd_validate(args) -> int:
    tol = _tolerance(args)
    channel = _load_channel(args, tol, require_valid=False)
    report = validate(channel, tol)
    print(json.dumps(report.to_dict()))
    ok = report.trace_preserving and report.completely_positive
    return EXIT_OK if ok else EXIT_INVALID


def cmd_return_time(args) -> int:
    tol = _tolerance(args)
    channel = _load_channel(args, tol)
    psi = _psi(args, channel)
    try:
        analysis = quantization_verdict(channel, psi, tol, horizon=args.horizon or 0,
                                        quantization_tol=args.quantization_tol)
    except TheoremViolation as exc:
        print(exc.analysis.to_json())
        print(f"theorem violation: {exc} (defect {exc.defect:.3e})", file=sys.stderr)
        return EXIT_THEOREM
    print(analysis.to_json())
    return EXIT_OK


def _write_distribution(rows, header, out):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)


def cmd_distribution(args) -> int:
    tol = _tolerance(args)
    if not args.horizon or args.horizon < 1:
        raise ParseError("--horizon must be at least 1")
    channel = _load_channel(args, tol)
    series = return_series(channel, _psi(args, channel), args.horizon)
    rows = [[t, repr(series.p[t - 1]), repr(series.q[t])] for t in range(1, args.horizon + 1)]
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "distribution.csv"), "w", newline="") as fh:
            _write_distribution(rows, ["t", "p", "q"], fh)
    else:
        _write_distribution(rows, ["t", "p", "q"], sys.stdout)
    return EXIT_OK


def _parse_values(text: str) -> list:
    """``"0,0.5,1"`` or ``"start:stop:num"`` (inclusive linspace)."""
    try:
        if ":" in text:
            a, b, n = text.split(":")
            return [float(x) for x in np.linspace(float(a), float(b), int(n))]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ParseError(f"bad value list {text!r}") from exc


def cmd_sweep(args) -> int:
    tol = _tolerance(args)
    if not args.builder:
        raise ParseError("sweep needs --builder")
    cfg = _load_json_arg(args.builder)
    rows = []
    for value in _parse_values(args.values):
        step = dict(cfg)
        step[args.param] = value
        sub = argparse.Namespace(**vars(args))
        sub.builder, sub.channel = json.dumps(step), None
        channel = _load_channel(sub, tol)
        try:
            a = quantization_verdict(channel, _psi(args, channel), tol,
                                     quantization_tol=args.quantization_tol)
        except TheoremViolation as exc:
            print(f"theorem violation at {args.param}={value}: {exc}", file=sys.stderr)
            return EXIT_THEOREM
        rows.append([repr(value), _fmt(a.exact_T), a.relevant_dim, int(a.psi_unital), int(a.recurrent)])
    if args.out:
        os.makedirs(args.out, exist_ok=True)
    out = open(os.path.join(args.out, "sweep.csv"), "w", newline="") if args.out else sys.stdout
    try:
        _write_distribution(rows, [args.param, "exact_T", "relevant_dim", "psi_unital", "recurrent"], out)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def _ensemble_spec_from_config(cfg: dict, args) -> EnsembleSpec:
    try:
        sweep = cfg.get("sweep", {"param": "d", "values": [0.0]})
        horizons = [None if (h is None or h == "inf") else int(h) for h in cfg.get("horizons", [None])]
        seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
        return EnsembleSpec(
            builder=dict(cfg["builder"]),
            n_samples=int(cfg["n_samples"]),
            seed=seed,
            sweep_param=sweep["param"],
            sweep_values=tuple(float(v) for v in sweep["values"]),
            horizons=tuple(horizons),
            psi=int(cfg.get("psi", 0)),
            shared_seed=bool(cfg.get("shared_seed", False)),
            jobs=args.jobs,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad ensemble config: {exc}") from exc


def _write_ensemble(spec: EnsembleSpec, stem: str, out: str, tol: Tolerance) -> dict:
    stats = run_ensemble(spec, tol)
    write_stats_csv(stats, os.path.join(out, f"{stem}.csv"))
    write_samples_csv(stats, spec.horizons, os.path.join(out, f"{stem}_samples.csv"))
    return {
        "builder": spec.builder,
        "n_samples": spec.n_samples,
        "seed": spec.seed,
        "sweep": {"param": spec.sweep_param, "values": list(spec.sweep_values)},
        "horizons": ["inf" if h is None else h for h in spec.horizons],
        "psi": spec.psi,
        "files": [f"{stem}.csv", f"{stem}_samples.csv"],
    }


def cmd_ensemble(args) -> int:
    tol = _tolerance(args)
    if not args.config:
        raise ParseError("ensemble needs --config")
    cfg = _load_json_arg(args.config)
    spec = _ensemble_spec_from_config(cfg, args)
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    entry = _write_ensemble(spec, "ensemble", out, tol)
    with open(os.path.join(out, "manifest.json"), "w") as fh:
        json.dump({"command": "ensemble", "runs": [entry]}, fh, indent=2, sort_keys=True)
    return EXIT_OK


# -- figure presets ----------------------------------------------------------

FIG_GRID = [round(x, 10) for x in np.linspace(0.0, 1.0, 21)]
FIG2_RATES = (0.0, 0.1, 0.5)
FIG7_RATES = (0.05, 0.5, 0.95)
FIG5_CASES = {"a": 5, "b": 0, "c": 2}


def _distribution_rows(channel, horizon, prefix):
    series = return_series(channel, basis_state(channel.dim, 0), horizon)
    return [prefix + [t, repr(series.p[t - 1]), repr(series.q[t])] for t in range(1, horizon + 1)]


def reproduce(figure: int, seed: int, out: str, samples: int | None = None,
              horizon: int | None = None, jobs: int = 1, tol: Tolerance | None = None) -> dict:
    """Write the data files behind one figure and return its manifest."""
    tol = tol or Tolerance()
    os.makedirs(out, exist_ok=True)
    manifest = {"figure": figure, "seed": seed, "runs": []}
    if figure == 2:
        horizon = horizon or 60
        rows, exact = [], []
        for hop_set in (0, 1):
            hop_seed = np.random.SeedSequence(entropy=seed, spawn_key=(hop_set,))
            hop_rng = np.random.Generator(np.random.Philox(hop_seed))
            v = sample_disk(hop_rng, 5, 1.0)
            hoppings = [[z.real, z.imag] for z in v]
            for d in FIG2_RATES:
                ch = build_channel({"family": "star", "M": 6, "d": d, "hoppings": hoppings})
                rows += _distribution_rows(ch, horizon, [hop_set, repr(d)])
                a = quantization_verdict(ch, basis_state(6, 0), tol)
                exact.append({"set": hop_set, "d": d, "hoppings": hoppings,
                              "exact_T": a.exact_T, "relevant_dim": a.relevant_dim})
        with open(os.path.join(out, "fig2_distributions.csv"), "w", newline="") as fh:
            _write_distribution(rows, ["set", "d", "t", "p", "q"], fh)
        manifest["runs"].append({"files": ["fig2_distributions.csv"], "horizon": horizon,
                                 "panels": exact})
    elif figure == 3:
        horizons = (700, 7000, None)
        spec = EnsembleSpec({"family": "star", "M": 6, "hoppings": "random", "radius": 1.0},
                            samples or 2000, seed, "d", FIG_GRID, horizons, jobs=jobs)
        manifest["runs"].append(_write_ensemble(spec, "fig3_bands", out, tol))
    elif figure == 5:
        for case, target in FIG5_CASES.items():
            spec = EnsembleSpec({"family": "transfer", "M": 6, "target": target, "unitary": "cue"},
                                samples or 2000, seed, "d", FIG_GRID, (None,), jobs=jobs)
            entry = _write_ensemble(spec, f"fig5_case_{case}", out, tol)
            entry["case"] = case
            manifest["runs"].append(entry)
    elif figure == 7:
        horizon = horizon or 40
        h_seed = int(np.random.SeedSequence(entropy=seed, spawn_key=(7,)).generate_state(1)[0])
        rows, exact = [], []
        for d in FIG7_RATES:
            cfg = {"family": "loop", "M": 6, "d": d,
                   "unitary": {"family": "disk_hamiltonian", "radius": 0.1, "seed": h_seed}}
            ch = build_channel(cfg)
            rows += _distribution_rows(ch, horizon, [repr(d)])
            a = quantization_verdict(ch, basis_state(6, 0), tol)
            exact.append({"d": d, "exact_T": a.exact_T, "relevant_dim": a.relevant_dim})
        with open(os.path.join(out, "fig7_distributions.csv"), "w", newline="") as fh:
            _write_distribution(rows, ["d", "t", "p", "q"], fh)
        manifest["runs"].append({"files": ["fig7_distributions.csv"], "horizon": horizon,
                                 "hamiltonian_seed": h_seed, "panels": exact})
    else:
        raise ParseError(f"no preset for figure {figure}")
    with open(os.path.join(out, f"fig{figure}_manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    return manifest


def cmd_reproduce(args) -> int:
    reproduce(args.figure, args.seed if args.seed is not None else 0, args.out or ".",
              samples=args.samples, horizon=args.horizon, jobs=args.jobs, tol=_tolerance(args))
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--channel", metavar="FILE", help="channel JSON file")
    common.add_argument("--builder", metavar="JSON", help="builder spec (inline JSON or file)")
    common.add_argument("--psi", type=int, default=0, help="start/return node (default 0)")
    common.add_argument("--horizon", type=int, default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    common.add_argument("--tol-rank", type=float, dest="tol_rank")
    common.add_argument("--tol-check", type=float, dest="tol_check")
    common.add_argument("--tol-converge", type=float, dest="tol_converge")
    common.add_argument("--quantization-tol", type=float, default=1e-6, dest="quantization_tol")
    common.add_argument("--out", metavar="DIR")

    parser = argparse.ArgumentParser(prog="qrecur", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="check a channel").set_defaults(func=cmd_validate)
    sub.add_parser("return-time", parents=[common],
                   help="exact expected return time").set_defaults(func=cmd_return_time)
    sub.add_parser("distribution", parents=[common],
                   help="first-return distribution as CSV").set_defaults(func=cmd_distribution)
    p = sub.add_parser("sweep", parents=[common], help="return time over a parameter grid")
    p.add_argument("--param", default="d")
    p.add_argument("--values", required=True, help="comma list or start:stop:num")
    p.set_defaults(func=cmd_sweep)
    p = sub.add_parser("ensemble", parents=[common], help="random ensemble statistics")
    p.add_argument("--config", required=True, help="ensemble config (inline JSON or file)")
    p.set_defaults(func=cmd_ensemble)
    p = sub.add_parser("reproduce", parents=[common], help="regenerate figure data")
    p.add_argument("figure", type=int, choices=(2, 3, 5, 7))
    p.add_argument("--samples", type=int, default=None, help="override ensemble size")
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InvalidChannel as exc:
        print(str(exc))
        print("error: channel is not trace preserving and completely positive", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
