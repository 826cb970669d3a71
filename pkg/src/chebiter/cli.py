"""Command line front end for the reference experiments.

Every subcommand prints a short summary to stdout and, when --out is
given, writes trace/summary CSV files (plus PGM images for deblur) into
that directory. Reruns with identical arguments reproduce the output
files byte for byte.

Settings resolve in three layers: built-in defaults, then a --config
file of flat key = value lines, then explicit flags. Exit codes: 0 on
success (a diverging run prints a warning but still exits 0), 2 on I/O
failure, 64 on a usage error, 65 on a config file error.
"""
from __future__ import annotations

import argparse
import csv
import os
import sys
from typing import Dict, List, Optional, Sequence, Tuple

from . import __version__
from .errors import ChebiterError, ConfigError, InvalidInput
from .experiments import (
    BOUNDS_FIELDS,
    ExperimentResult,
    bounds_rows,
    run_deblur,
    run_ista,
    run_jacobi,
    run_tanh_gram,
    run_tanh_solve,
    run_toy_power,
)
from .traceio import load_config

EX_OK = 0
EX_IOERR = 2
EX_USAGE = 64
EX_CONFIG = 65

# Flag schema per subcommand: name -> default. The default's type is the
# flag's type. Comma lists of periods stay strings until dispatch; 0 or
# an empty string means "use the per-variant default".
SCHEMAS: Dict[str, Dict[str, object]] = {
    "bounds": {"a": 0.6766, "b": 1.922, "periods": "1,2,4,8"},
    "jacobi": {"n": 64, "seed": 0, "periods": "1,8", "iters": 40},
    "toy": {
        "map": "power",
        "periods": "",
        "iters": 0,
        "n": 128,
        "seed": 0,
        "std": 0.022,
        "lam_max": 0.97,
    },
    "ista": {
        "n": 256,
        "m": 128,
        "density": 0.1,
        "noise": 0.1,
        "seeds": 100,
        "iters": 1500,
        "period": 8,
        "fista_iters": 100,
        "record_first": 3,
    },
    "deblur": {
        "height": 28,
        "width": 28,
        "relax": 0.8,
        "range_a": 0.18,
        "range_b": 0.98,
        "period": 8,
        "iters": 128,
        "seeds": 10,
    },
}

_CHOICES = {("toy", "map"): ("power", "tanh", "gram")}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse parser that reports usage problems as exceptions so the
    caller can map them to exit code 64."""

    def error(self, message):
        raise _UsageError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog="chebiter", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "bounds": "print the contraction bound table for a range",
        "jacobi": "Jacobi iteration on a random dominant system",
        "toy": "small nonlinear maps (power / tanh / gram)",
        "ista": "sparse recovery sweep with smooth shrinkage",
        "deblur": "image deblurring through a saturating blur",
    }
    for command, schema in SCHEMAS.items():
        p = sub.add_parser(command, help=helps[command])
        p.add_argument("--config", default=None, help="flat key = value settings file")
        p.add_argument("--out", default=None, help="directory for trace/summary files")
        for key, default in schema.items():
            kwargs = {"default": argparse.SUPPRESS, "type": type(default)}
            choices = _CHOICES.get((command, key))
            if choices:
                kwargs["choices"] = choices
            p.add_argument(f"--{key.replace('_', '-')}", dest=key, **kwargs)
    return parser


def _parse_periods(text: str, exc=None) -> Tuple[int, ...]:
    exc = exc or InvalidInput
    try:
        periods = tuple(int(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise exc(f"periods must be a comma list of integers, got {text!r}")
    if not periods:
        raise exc(f"periods list is empty: {text!r}")
    return periods


def _coerce(key: str, raw: str, default: object) -> object:
    try:
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except ValueError:
        raise ConfigError(f"config value for {key!r} is not a number: {raw!r}")
    if key == "periods":
        _parse_periods(raw, ConfigError)
    return raw


def merge_settings(command: str, args: argparse.Namespace) -> Dict[str, object]:
    """Resolve settings as defaults, then config file, then flags."""
    schema = SCHEMAS[command]
    merged = dict(schema)
    if args.config is not None:
        for key, raw in load_config(args.config).items():
            key = key.replace("-", "_")
            if key not in schema:
                raise ConfigError(f"unknown config key {key!r} for command {command!r}")
            value = _coerce(key, raw, schema[key])
            choices = _CHOICES.get((command, key))
            if choices and value not in choices:
                raise ConfigError(f"config value for {key!r} must be one of {choices}")
            merged[key] = value
    for key in schema:
        if hasattr(args, key):
            merged[key] = getattr(args, key)
    return merged


def _hfmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _print_rows(rows: List[dict]) -> None:
    for row in rows:
        print("  " + " ".join(f"{k}={_hfmt(v)}" for k, v in row.items()))


def _print_result(result: ExperimentResult, out_dir: Optional[str]) -> None:
    head = " ".join(f"{k}={_hfmt(v)}" for k, v in result.headline.items())
    print(f"{result.name}: {head}")
    _print_rows(result.summary)
    if out_dir is not None:
        print(f"wrote {result.trace_path(out_dir)} and {result.summary_path(out_dir)}")
    for message in result.warnings:
        print(f"warning: {message}", file=sys.stderr)


def _cmd_bounds(settings: Dict[str, object], out_dir: Optional[str]) -> None:
    rows = bounds_rows(
        float(settings["a"]), float(settings["b"]), _parse_periods(str(settings["periods"]))
    )
    print(f"bounds: range [{_hfmt(settings['a'])}, {_hfmt(settings['b'])}]")
    _print_rows(rows)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, "bounds.csv")
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=BOUNDS_FIELDS, lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow(
                    {k: (f"{v:.17g}" if isinstance(v, float) else v) for k, v in row.items()}
                )
        print(f"wrote {path}")


def _cmd_toy(settings: Dict[str, object], out_dir: Optional[str]) -> ExperimentResult:
    variant = settings["map"]
    periods = str(settings["periods"])
    iters = int(settings["iters"])
    if variant == "power":
        return run_toy_power(
            out_dir,
            periods=_parse_periods(periods or "1,2,8"),
            iters=iters or 40,
        )
    if variant == "tanh":
        return run_tanh_solve(
            out_dir,
            period=_parse_periods(periods or "8")[0],
            iters=iters or 20,
        )
    return run_tanh_gram(
        out_dir,
        n=int(settings["n"]),
        seed=int(settings["seed"]),
        std=float(settings["std"]),
        lam_max=float(settings["lam_max"]),
        periods=_parse_periods(periods or "2,4,8"),
        iters=iters or 400,
    )


def _dispatch(command: str, settings: Dict[str, object], out_dir: Optional[str]) -> None:
    if command == "bounds":
        _cmd_bounds(settings, out_dir)
        return
    if command == "jacobi":
        result = run_jacobi(
            out_dir,
            n=int(settings["n"]),
            seed=int(settings["seed"]),
            periods=_parse_periods(str(settings["periods"])),
            iters=int(settings["iters"]),
        )
    elif command == "toy":
        result = _cmd_toy(settings, out_dir)
    elif command == "ista":
        result = run_ista(
            out_dir,
            n=int(settings["n"]),
            m=int(settings["m"]),
            density=float(settings["density"]),
            noise_sigma=float(settings["noise"]),
            seeds=int(settings["seeds"]),
            iters=int(settings["iters"]),
            period=int(settings["period"]),
            fista_iters=int(settings["fista_iters"]),
            record_first=int(settings["record_first"]),
        )
    else:
        result = run_deblur(
            out_dir,
            height=int(settings["height"]),
            width=int(settings["width"]),
            relax=float(settings["relax"]),
            range_a=float(settings["range_a"]),
            range_b=float(settings["range_b"]),
            period=int(settings["period"]),
            iters=int(settings["iters"]),
            seeds=int(settings["seeds"]),
        )
    _print_result(result, out_dir)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EX_USAGE
    except SystemExit as exc:  # --help / --version
        return exc.code if isinstance(exc.code, int) else EX_OK
    try:
        settings = merge_settings(args.command, args)
        _dispatch(args.command, settings, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EX_CONFIG
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EX_IOERR
    except ChebiterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_USAGE
    return EX_OK


def entrypoint() -> None:
    sys.exit(main())
