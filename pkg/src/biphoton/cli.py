"""Command-line front end: ``biphoton <experiment> [options]`` writes a CSV table.

Exit status 0 on success, 2 on invalid parameters, 3 when a numerical
integral or check fails (the table is still written).
"""
from __future__ import annotations

import argparse
import datetime as _dt
import io
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import __version__
from .emitters import PRESETS, load_preset, parse_key_value
from .experiments import COMMON, EXPERIMENTS, ParameterError, Table, resolve_params, run_experiment
from .svg import table_heatmap

__all__ = ["main", "build_parser", "format_csv", "worker_count"]

EXIT_USAGE = 2
EXIT_NUMERICAL = 3


def worker_count() -> int:
    raw = os.environ.get("BIPHOTON_THREADS")
    cpus = os.cpu_count() or 1
    if raw is None:
        return cpus
    try:
        n = int(raw)
    except ValueError:
        raise ParameterError(f"BIPHOTON_THREADS must be an integer, got {raw!r}")
    return max(1, min(n, cpus))


@contextmanager
def _mapper(workers: int):
    if workers <= 1:
        yield map
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # Executor.map yields in submission order, so output bytes do not depend on scheduling
        yield pool.map


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="biphoton", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"biphoton {__version__}")
    sub = parser.add_subparsers(dest="experiment", required=True, metavar="experiment")
    for name, exp in EXPERIMENTS.items():
        p = sub.add_parser(name, help=exp.description, description=exp.description)
        p.add_argument("-o", "--out", help="CSV output path (default: stdout)")
        p.add_argument("--svg", help="also write a heatmap SVG here")
        p.add_argument("--config", help="key = value file with parameter overrides")
        p.add_argument("--preset-file", help="register a physical preset from a key = value file")
        p.add_argument("--no-timestamp", action="store_true", help="omit the timestamp comment line")
        for key in {**COMMON, **exp.defaults}:
            default = exp.defaults.get(key, COMMON.get(key))
            p.add_argument(f"--{key.replace('_', '-')}", dest=key, default=None, help=f"(default {default})")
    return parser


def format_csv(table: Table, header: list[str]) -> str:
    buf = io.StringIO()
    for line in header + table.comments:
        buf.write(f"# {line}\n")
    buf.write(",".join(table.columns) + "\n")
    for row in np.atleast_2d(table.rows) if table.rows.size else []:
        buf.write(",".join("%.17g" % v for v in row) + "\n")
    return buf.getvalue()


def _header(name: str, params: dict, timestamp: bool) -> list[str]:
    preset = PRESETS[params["preset"]]
    lines = [
        f"biphoton {__version__} experiment {name}",
        (
            f"preset {preset.name}: gamma0/2pi = {preset.gamma0_hz:.17g} Hz, "
            f"lambda0 = {preset.lambda0_vac:.17g} m, n = {preset.refractive_index:.17g}"
        ),
        f"seed = {params['seed']}",
        f"rel_tol = {params['rel_tol']}",
        "params: " + "; ".join(f"{k}={params[k]}" for k in sorted(params)),
    ]
    if timestamp:
        lines.append("generated " + _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"))
    return lines


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    name = args.experiment
    try:
        if args.preset_file:
            load_preset(args.preset_file)
        overrides = {}
        if args.config:
            raw = parse_key_value(Path(args.config).read_text())
            overrides.update({k.replace("-", "_"): v for k, v in raw.items()})
        keys = set(COMMON) | set(EXPERIMENTS[name].defaults)
        overrides.update({k: getattr(args, k) for k in keys if getattr(args, k) is not None})
        params = resolve_params(name, overrides)
        workers = worker_count()
        with _mapper(workers) as mapper:
            table = run_experiment(name, params, mapper)
    except (ParameterError, ValueError, OSError) as exc:
        print(f"biphoton {name}: {exc}", file=sys.stderr)
        return EXIT_USAGE

    text = format_csv(table, _header(name, params, not args.no_timestamp))
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.svg and table.heatmap and table.rows.size:
        value, x, y = table.heatmap
        Path(args.svg).write_text(table_heatmap(table.columns, table.rows, value, x, y, table.log_color))
    for line in table.report:
        print(line, file=sys.stderr)
    if table.failed:
        print(f"biphoton {name}: numerical failure: {table.failed}", file=sys.stderr)
        return EXIT_NUMERICAL
    return 0


if __name__ == "__main__":
    sys.exit(main())
