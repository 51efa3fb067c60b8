"""Command-line interface.

Exit codes: 0 success, 1 usage or domain error, 2 I/O error. Diagnostics go
to stderr, results to stdout; every number on stdout has six decimals.
"""

from __future__ import annotations

import argparse
import sys
from collections import Counter
from pathlib import Path

import numpy as np

from . import io as sio
from .builder import ConfigError, build
from .config import ConfigFileError, load_configs
from .core import ShapeMismatch, SynthError, mask_runs
from .generators import GeneratorError
from .metrics import METRIC_NAMES, EvalOptions, MetricError, evaluate_all
from .plot import MissingComponents, per_class_indices, render_components_svg

EXIT_OK, EXIT_USAGE, EXIT_IO = 0, 1, 2


class _Fail(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        super().__init__(message)


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def _read_dataset(path):
    try:
        return sio.read_dataset(path)
    except (sio.IoError, sio.FormatError, OSError) as exc:
        raise _Fail(EXIT_IO, str(exc)) from exc
    except SynthError as exc:
        raise _Fail(EXIT_USAGE, str(exc)) from exc


# ---------------------------------------------------------------------------
# generate


def cmd_generate(args) -> int:
    try:
        configs = load_configs(Path(args.config))
    except OSError as exc:
        raise _Fail(EXIT_IO, f"cannot read config: {exc}") from exc
    except ConfigFileError as exc:
        raise _Fail(EXIT_USAGE, str(exc)) from exc

    names = args.dataset or list(configs)
    unknown = [n for n in names if n not in configs]
    if unknown:
        raise _Fail(EXIT_USAGE, f"unknown dataset(s) {unknown}; config defines {list(configs)}")

    out = Path(args.out)
    rows = []
    for name in names:
        cfg = configs[name]
        if args.no_components:
            cfg.keep_components = False
        try:
            ds = build(cfg)
        except (ConfigError, GeneratorError) as exc:
            raise _Fail(EXIT_USAGE, f"{name}: {exc}") from exc
        if args.shuffle is not None:
            ds = ds.take(np.random.default_rng(args.shuffle).permutation(ds.n_samples))
        try:
            sio.write_dataset(ds, out / name)
        except (sio.IoError, OSError) as exc:
            raise _Fail(EXIT_IO, str(exc)) from exc
        rows.append((name, str(ds.shape), str(ds.meta.n_classes), f"{ds.mask.mean():.6f}"))

    header = ("name", "shape", "classes", "prevalence")
    widths = [max(len(r[k]) for r in rows + [header]) for k in range(4)]
    for row in [header] + rows:
        print("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    return EXIT_OK


# ---------------------------------------------------------------------------
# evaluate


def _metric_list(text: str) -> list[str]:
    if text.strip() == "all":
        return list(METRIC_NAMES)
    return [part.strip() for part in text.split(",") if part.strip()]


def cmd_evaluate(args) -> int:
    ds = _read_dataset(args.dataset)
    try:
        attr, shape, _ = sio.read_npy(args.attributions)
    except (sio.IoError, sio.FormatError) as exc:
        raise _Fail(EXIT_IO, str(exc)) from exc
    if shape != ds.shape:
        raise _Fail(EXIT_USAGE, f"shape mismatch: attributions {shape} vs dataset {ds.shape}")

    opts = EvalOptions(use_abs=not args.no_abs, normalize=args.normalize)
    try:
        results = evaluate_all(attr.astype(np.float64), ds, opts, _metric_list(args.metrics))
    except (MetricError, ShapeMismatch, ValueError) as exc:
        raise _Fail(EXIT_USAGE, str(exc)) from exc

    fmt = args.format or ("csv" if str(args.out).endswith(".csv") else "json")
    try:
        sio.write_metrics_report(results, args.out, fmt)
    except sio.IoError as exc:
        raise _Fail(EXIT_IO, str(exc)) from exc
    for name, res in results.items():
        if res.warning:
            print(f"warning: {res.warning}", file=sys.stderr)
        print(f"{name} {res.mean:.6f}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# inspect


def cmd_inspect(args) -> int:
    ds = _read_dataset(args.dataset)
    N, D, T = ds.shape
    print(f"shape: ({N}, {D}, {T})")
    print(f"normalization: {ds.meta.normalization}")
    print(f"random_state: {ds.meta.random_state}")
    print(f"fingerprint: {ds.meta.config_fingerprint}")
    print(f"generator_catalog_version: {ds.meta.generator_catalog_version}")
    print(f"components: {'yes' if ds.components is not None else 'no'}")
    print("classes:")
    for label in ds.meta.class_labels:
        rows = ds.y == label
        count = int(rows.sum())
        prevalence = float(ds.mask[rows].mean()) if count else 0.0
        print(f"  {label}: samples {count}, prevalence {prevalence:.6f}")
    lengths = Counter(n for i in range(N) for ch in range(D) for _, n in mask_runs(ds.mask[i, ch]))
    print("window lengths:")
    if not lengths:
        print("  none")
    for length in sorted(lengths):
        print(f"  {length}: {lengths[length]}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# plot


def cmd_plot(args) -> int:
    ds = _read_dataset(args.dataset)
    indices = [args.sample] if args.sample is not None else per_class_indices(ds)
    try:
        svg = render_components_svg(ds, indices)
    except MissingComponents as exc:
        raise _Fail(EXIT_USAGE, str(exc)) from exc
    except IndexError as exc:
        raise _Fail(EXIT_USAGE, str(exc)) from exc
    try:
        Path(args.out).write_text(svg, encoding="utf-8")
    except OSError as exc:
        raise _Fail(EXIT_IO, f"cannot write {args.out}: {exc}") from exc
    print(f"wrote {args.out} ({len(indices)} row(s))")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="synthgt", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="build datasets from a YAML config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dataset", action="append", help="dataset name to build (repeatable; default all)")
    p.add_argument("--no-components", action="store_true", help="do not store signal/feature tensors")
    p.add_argument("--shuffle", type=int, metavar="SEED", help="permute samples with this seed")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("evaluate", help="score attributions against a dataset's masks")
    p.add_argument("--dataset", required=True)
    p.add_argument("--attributions", required=True)
    p.add_argument("--metrics", default="all", help=f"comma-separated subset of {', '.join(METRIC_NAMES)}")
    p.add_argument("--normalize", action="store_true", help="prevalence-normalize the AUC metrics")
    p.add_argument("--no-abs", action="store_true", help="score signed attributions")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("json", "csv"))
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("inspect", help="summarize a dataset directory")
    p.add_argument("--dataset", required=True)
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("plot", help="SVG of background, feature and sum per sample")
    p.add_argument("--dataset", required=True)
    which = p.add_mutually_exclusive_group()
    which.add_argument("--sample", type=int, metavar="INDEX")
    which.add_argument("--per-class", action="store_true", help="first sample of each class (default)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except _Fail as exc:
        _err(str(exc))
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
