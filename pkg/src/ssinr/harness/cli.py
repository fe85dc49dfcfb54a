"""Command-line entry point: ``ssinr <command> ...``.

Exit codes: 0 success, 1 validation failure, 2 configuration/ingestion
error, 3 numeric abort. ``SSINR_OUT`` sets the default output root and
``SSINR_JOBS`` the default sweep worker count.
"""
from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from .. import _kernels
from ..errors import CheckpointError, ConfigError, ContractViolation, IngestionError, NumericError
from ..signals import FIXTURES
from . import config as C

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def _range_arg(text):
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'lo,hi', got {text!r}") from None
    return [lo, hi]


def _add_config_flags(p, keys=None):
    """One ``--flag`` per run-config key; all default to None (= not given)."""
    for key, default in C.DEFAULTS.items():
        if keys is not None and key not in keys:
            continue
        flag = "--" + key.replace("_", "-")
        if key in ("input_range", "output_range"):
            p.add_argument(flag, type=_range_arg, default=None, metavar="LO,HI")
        elif isinstance(default, bool):
            p.add_argument(flag, action="store_const", const=True, default=None)
        elif isinstance(default, int):
            p.add_argument(flag, type=int, default=None)
        elif isinstance(default, float):
            p.add_argument(flag, type=float, default=None)
        elif key == "crop":
            p.add_argument(flag, type=int, default=None)
        elif key == "max_seconds":
            p.add_argument(flag, type=float, default=None)
        else:
            p.add_argument(flag, default=None)


def _flag_overrides(args, keys=None):
    return {k: getattr(args, k) for k in C.DEFAULTS if (keys is None or k in keys) and hasattr(args, k)}


def cmd_fit(args):
    from .runner import execute

    file_cfg = C.load_config_file(args.config) if args.config else {}
    cfg = C.merge(file_cfg, _flag_overrides(args))
    out = Path(cfg["out_dir"]) if cfg["out_dir"] else C.out_root() / "fit"
    summary = execute(cfg, out)
    f = summary["final"]
    ssim = "" if f["ssim"] is None else f" ssim={f['ssim']:.4f}"
    print(f"final mse={f['mse']:.6g} psnr={f['psnr']:.2f} dB{ssim} ({summary['seconds']:.1f}s) -> {out}")
    return EXIT_OK


def cmd_sweep(args):
    from .sweep import SweepSpec, run_sweep

    spec = SweepSpec.load(args.spec)
    out = Path(args.out) if args.out else C.out_root() / "sweep"
    rows = run_sweep(spec, out, jobs=args.jobs or C.default_jobs())
    for row in rows:
        print(", ".join(f"{k}={v}" for k, v in row.items()))
    print(f"-> {out / 'sweep.csv'}")
    return EXIT_OK


def cmd_table(args):
    from .tables import TABLE_IDS, run_table

    if args.table_id not in TABLE_IDS:
        raise ConfigError(f"unknown table id {args.table_id!r}; expected one of {', '.join(TABLE_IDS)}")
    out = Path(args.out) if args.out else C.out_root() / "tables" / f"{args.table_id}.csv"
    columns, rows = run_table(args.table_id, args.dataset_dir, base=_flag_overrides(args),
                              full_scale=args.paper_scale, out_path=out)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([row.get(c, "") for c in columns])
    return EXIT_OK


def cmd_gradcheck(args):
    from .. import backbones
    from ..gradcheck import TOLERANCE, run_matrix

    backbones._DERIVATIVE_FAULTS.update(args.inject_fault or [])
    try:
        results = run_matrix(seed=args.seed)
    finally:
        backbones._DERIVATIVE_FAULTS.clear()
    for r in results:
        print(f"{'ok  ' if r.ok else 'FAIL'} {r.max_rel_error:.3e}  {r.label}")
    failed = [r for r in results if not r.ok]
    print(f"{len(results)} combinations, tolerance {TOLERANCE:g}, {len(failed)} failed (kernels: {_kernels.BACKEND})")
    if failed:
        for r in failed:
            print(f"gradient check failed: {r.label}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def cmd_audio(args):
    from .audio import COLUMNS, run_audio

    out = Path(args.out) if args.out else C.out_root() / "audio" / "audio.csv"
    base = _flag_overrides(args)
    rows = run_audio(base, backbones=args.backbones.split(","), trials=args.trials, out_path=out)
    for row in rows:
        print(", ".join(f"{c}={row[c]}" for c in COLUMNS))
    print(f"-> {out}")
    return EXIT_OK


def cmd_report(args):
    from .report import write_report

    out = Path(args.out) if args.out else Path(args.directory) / "summary.md"
    n = write_report(args.directory, out)
    print(f"merged {n} CSV file(s) -> {out}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="ssinr", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit one signal")
    p.add_argument("--config", help="JSON run config; flags override it")
    _add_config_flags(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("sweep", help="grid sweep over one or two config axes")
    p.add_argument("spec", help="JSON sweep spec: {base, axes: [{name, values}], seeds, max_cells}")
    p.add_argument("--out")
    p.add_argument("--jobs", type=int, default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("table", help="reproduce one ablation table layout")
    p.add_argument("table_id")
    p.add_argument("--dataset-dir", default=str(FIXTURES / "natural64.png"),
                   help="directory of images (or a single image); default: bundled natural fixture")
    p.add_argument("--paper-scale", action="store_true", help="256x256 crops, width 256, 500 epochs")
    p.add_argument("--out")
    _add_config_flags(p, {"backbone", "epochs", "width", "seed", "precision", "crop", "learning_rate", "omega0"})
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("gradcheck", help="analytic vs finite-difference gradients for every backbone/transform")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--inject-fault", action="append", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("audio", help="repeated audio fits, vanilla vs scale-and-shift")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--backbones", default="siren", help="comma-separated backbone kinds")
    p.add_argument("--out")
    _add_config_flags(p, {"input", "epochs", "width", "seed", "precision", "max_seconds", "learning_rate", "omega0",
                          "hidden_layers"})
    p.set_defaults(func=cmd_audio, input="chord.wav")

    p = sub.add_parser("report", help="merge every CSV under a directory into one markdown summary")
    p.add_argument("directory")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NumericError as exc:
        print(f"numeric abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, IngestionError, ContractViolation, CheckpointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
