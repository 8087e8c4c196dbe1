"""Command-line interface: run experiments, classify channels, run the suite.

Subcommands:
  zeno run <config.toml>   execute an experiment, write CSV/JSON/figure
  zeno classify <spec>     peripheral-spectrum report for a catalog channel
  zeno channels            list the channel and generator catalogs
  zeno suite               run the packaged reproduction suite

Output root defaults to ./runs and is overridden by ZENO_RUNS_DIR.
Exit codes: 0 success, 1 validation error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import (
    CHANNEL_CATALOG,
    GENERATOR_CATALOG,
    build_channel,
    load_config,
    parse_channel_spec,
)
from .errors import ParameterError, ValidationError, ZenoLabError
from .spectral import peripheral_analysis
from .zeno import zeno_error_curve

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2


def _runs_root(config_output_dir="runs"):
    return Path(os.environ.get("ZENO_RUNS_DIR", config_output_dir))


def _atomic_write(path, data):
    """Write bytes (or text) to path via a same-directory temp file + rename."""
    if isinstance(data, str):
        data = data.encode()
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_bytes(samples):
    lines = ["n,error"]
    for n, err in samples:
        lines.append(f"{int(n)},{err!r}")
    return ("\n".join(lines) + "\n").encode()


def _render_figure(curve, path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ns = [n for n, e in curve.samples if e > 0]
    errs = [e for _, e in curve.samples if e > 0]
    ax.loglog(ns, errs, "o-", label="Zeno error")
    if curve.fit_window and np.isfinite(curve.fitted_slope):
        lo, hi = curve.fit_window
        anchor_n = [n for n, e in curve.samples if lo <= n <= hi and e > 0]
        anchor_e = [e for n, e in curve.samples if lo <= n <= hi and e > 0]
        ref = anchor_e[0] * (np.asarray(anchor_n) / anchor_n[0]) ** curve.fitted_slope
        ax.loglog(
            anchor_n,
            ref,
            "--",
            label=f"slope {curve.fitted_slope:.2f} ± {curve.slope_half_width:.2f}",
        )
    ax.set_xlabel("n")
    ax.set_ylabel("trace-norm error")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def cmd_run(args):
    try:
        exp = load_config(args.config)
        run_cfg = exp.build_run()
    except (ValidationError, ParameterError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    out_dir = _runs_root(exp.output_dir) / exp.name / exp.config_hash()
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.time()
    try:
        curve = zeno_error_curve(run_cfg)
    except ZenoLabError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    _atomic_write(out_dir / "results.csv", _csv_bytes(curve.samples))
    report = {
        "name": exp.name,
        "seed": exp.seed,
        "fitted_slope": curve.fitted_slope,
        "slope_half_width": curve.slope_half_width,
        "fit_window": list(curve.fit_window),
        "excluded_samples": list(curve.excluded_samples),
        "samples": curve.to_rows(),
        "config": exp.to_dict(),
    }
    _atomic_write(out_dir / "report.json", json.dumps(report, indent=2) + "\n")
    _render_figure(curve, out_dir / "error_curve.png")

    files = {}
    for name in ("results.csv", "report.json", "error_curve.png"):
        files[name] = (out_dir / name).stat().st_size
    manifest = {
        "config_hash": exp.config_hash(),
        "tool_version": __version__,
        "seed": exp.seed,
        "started_at": started,
        "finished_at": time.time(),
        "files": files,
        "headline": {
            "fitted_slope": curve.fitted_slope,
            "max_error": max((e for _, e in curve.samples), default=None),
        },
    }
    _atomic_write(out_dir / "manifest.json", json.dumps(manifest, indent=2) + "\n")

    print(f"wrote {out_dir}")
    if np.isfinite(curve.fitted_slope):
        print(
            f"fit: slope {curve.fitted_slope:.4f} ± {curve.slope_half_width:.4f} "
            f"over n ∈ [{curve.fit_window[0]}, {curve.fit_window[1]}]"
        )
    else:
        print("fit: not enough samples (needs >= 4 nonzero errors)")
    return EXIT_OK


def cmd_classify(args):
    try:
        name, params, dim = parse_channel_spec(args.spec)
        if dim is None and name != "volterra":
            raise ValidationError("channel spec must include dim=<D>")
        channel = build_channel(name, params, dim)
    except (ValidationError, ParameterError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        report = peripheral_analysis(channel)
    except ZenoLabError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    print(f"channel: {args.spec}")
    for (lam, mult), nil in zip(report.peripheral_eigs, report.quasi_nilpotent_norms):
        print(
            f"  peripheral eigenvalue {lam.real:+.8f}{lam.imag:+.8f}i  "
            f"multiplicity {mult}  ||N|| = {nil:.3e}"
        )
    print(f"  gap delta = {report.gap_delta:.8f}")
    print(f"  admissible: {report.admissible}")
    if report.notes:
        for note in report.notes:
            print(f"  note: {note}")
    if dim is not None and name in ("attenuator",):
        print("  caveat: decision taken at finite truncation")

    out_dir = _runs_root() / "classify"
    out_dir.mkdir(parents=True, exist_ok=True)
    doc = report.to_dict()
    doc["channel_spec"] = args.spec
    safe = args.spec.replace(":", "_").replace(",", "_").replace("=", "-")
    _atomic_write(out_dir / f"{safe}.json", json.dumps(doc, indent=2) + "\n")
    return EXIT_OK


def cmd_channels(_args):
    print("channels:")
    for name in sorted(CHANNEL_CATALOG):
        print(f"  {name:24s} {CHANNEL_CATALOG[name]}")
    print("generators:")
    for name in sorted(GENERATOR_CATALOG):
        print(f"  {name:24s} {GENERATOR_CATALOG[name]}")
    return EXIT_OK


def cmd_suite(args):
    from .suite import run_suite

    records = run_suite(max_dim=args.max_dim)
    failed = []
    for rec in records:
        if rec["passed"] is None:
            status = "SKIP"
        elif rec["passed"]:
            status = "PASS"
        else:
            status = "FAIL"
            failed.append(rec["name"])
        print(f"  [{rec['criterion']:2d}] {status}  {rec['name']}")
    out_dir = _runs_root() / "suite"
    out_dir.mkdir(parents=True, exist_ok=True)
    _atomic_write(out_dir / "suite.json", json.dumps(records, indent=2, default=str) + "\n")
    if failed:
        print(f"failed criteria: {', '.join(failed)}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="zeno",
        description="Numerical laboratory for Zeno products of quantum "
        "operations and GKLS semigroups on Fock truncations.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute an experiment config")
    p_run.add_argument("config", help="path to a TOML experiment config")
    p_run.set_defaults(fn=cmd_run)

    p_cls = sub.add_parser("classify", help="peripheral spectrum of a channel")
    p_cls.add_argument(
        "spec", help="channel spec, e.g. 'depolarizing:p=0.5,dim=3' or 'volterra:grid=256'"
    )
    p_cls.set_defaults(fn=cmd_classify)

    p_cat = sub.add_parser("channels", help="list the channel catalog")
    p_cat.set_defaults(fn=cmd_channels)

    p_suite = sub.add_parser("suite", help="run the reproduction suite")
    p_suite.add_argument(
        "--max-dim",
        type=int,
        default=None,
        help="skip criteria needing truncation above this dimension",
    )
    p_suite.set_defaults(fn=cmd_suite)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
