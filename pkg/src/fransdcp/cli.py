"""Command-line entry point.

Writes ``results.csv`` and ``meta.json`` into ``--out``; the ``figure``
subcommand adds ``plot.svg``. Exit codes: 0 success, 1 validation
disagreement, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import platform
import sys
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .config import ExperimentConfig, config_to_dict, load_config, validate_config
from .errors import FranError, ParseError, StabilityError, ValidationError
from .experiment import OPERATIONS, rows_agree, run_operation, with_seed
from .presets import FIGURES, figure_preset

__all__ = ["main", "build_parser", "format_value", "write_csv", "write_svg"]

EXIT_OK, EXIT_DISAGREE, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
CSV_COLUMNS = ("sweep_var", "value", "mode", "analytic", "mc_point", "mc_ci99",
               "component")
SUBCOMMANDS = OPERATIONS + ("figure",)


def _u64(text):
    try:
        val = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= val < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return val


def _positive_int(text):
    try:
        val = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if val < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return val


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fransdcp",
        description="Data-compression success probability in clustered fog networks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON experiment config")
    common.add_argument("--out", type=Path, default=Path("."),
                        help="output directory (default: current directory)")
    common.add_argument("--seed", type=_u64, help="override the Monte Carlo seed")
    common.add_argument("--threads", type=_positive_int,
                        help="worker threads for scene sampling")
    common.add_argument("--figure", choices=FIGURES, help="use a figure preset")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    helps = {
        "stp": "transmission success probability per sweep point",
        "step": "task execution success probability per sweep point",
        "sdcp": "joint success probability per sweep point",
        "sweep": "alias of sdcp",
        "optimize": "optimal offloading ratio per sweep point",
        "validate": "analytic values next to Monte Carlo estimates",
        "figure": "run a figure preset and draw plot.svg",
    }
    for name in SUBCOMMANDS[:3] + ("sweep",) + SUBCOMMANDS[3:]:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def format_value(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def write_csv(path: Path, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in rows:
            w.writerow([r.sweep_var, format_value(r.value), r.mode,
                        format_value(r.analytic), format_value(r.mc_point),
                        format_value(r.mc_ci99), r.component])


def _plot_rows(rows, operation):
    want = "beta_star" if operation == "optimize" else "sdcp"
    series = {}
    for r in rows:
        if r.component == want:
            series.setdefault(r.mode, []).append(r)
    return series


def write_svg(path: Path, rows, preset) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "fransdcp", "svg.fonttype": "path"}):
        fig, ax = plt.subplots(figsize=(7, 4.5))
        for label, pts in _plot_rows(rows, preset.operation).items():
            x = np.array([p.value for p in pts]) * preset.x_scale
            line, = ax.plot(x, [p.analytic for p in pts], label=label)
            if pts[0].mc_point is not None:
                ax.errorbar(x, [p.mc_point for p in pts], yerr=[p.mc_ci99 for p in pts],
                            fmt="o", ms=3, color=line.get_color())
        ax.set_xlabel(preset.xlabel)
        ax.set_ylabel(preset.ylabel)
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=7)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


def _versions():
    import matplotlib
    return {"fransdcp": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "matplotlib": matplotlib.__version__}


def _meta(args, operation, panels, agree):
    first = panels[0][1]
    flags = asdict(first.options)
    flags["coupling_mode"] = first.mc.coupling_mode
    meta = {
        "command": args.command,
        "operation": operation,
        "figure": args.figure,
        "config_path": str(args.config) if args.config else None,
        "seed": first.mc.seed,
        "threads": first.mc.threads,
        "warmup_fraction": first.mc.warmup_fraction,
        "flags": flags,
        "kernel_backend": kernels.BACKEND,
        "versions": _versions(),
        "panels": {tag or "main": config_to_dict(cfg) for tag, cfg in panels},
    }
    if agree is not None:
        meta["all_within_ci"] = agree
    return meta


def _tagged(rows, tag):
    if not tag:
        return rows
    return [replace(r, mode=f"{r.mode}@{tag}") for r in rows]


def _run(args) -> int:
    base = load_config(args.config) if args.config else ExperimentConfig()
    base = replace(base, mc=with_seed(base.mc, args.seed, args.threads))
    command = "sdcp" if args.command == "sweep" else args.command
    if command == "figure" and not args.figure:
        raise ValidationError("the figure command needs --figure")
    if args.figure:
        preset = figure_preset(args.figure, base)
        panels = preset.panels
        operation = preset.operation if command == "figure" else command
    else:
        preset, panels, operation = None, (("", base),), command
    for _, cfg in panels:
        validate_config(cfg)
    rows = []
    for tag, cfg in panels:
        rows.extend(_tagged(run_operation(cfg, operation), tag))
    agree = rows_agree(rows) if operation == "validate" else None
    args.out.mkdir(parents=True, exist_ok=True)
    write_csv(args.out / "results.csv", rows)
    meta = _meta(args, operation, panels, agree)
    (args.out / "meta.json").write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    if command == "figure":
        write_svg(args.out / "plot.svg", rows, preset)
    if agree is False:
        bad = sum(not r.agrees() for r in rows)
        print(f"fransdcp: {bad} of {len(rows)} rows fall outside their 99% CI",
              file=sys.stderr)
        return EXIT_DISAGREE
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except (ParseError, ValidationError, StabilityError) as exc:
        print(f"fransdcp: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FranError as exc:
        print(f"fransdcp: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
