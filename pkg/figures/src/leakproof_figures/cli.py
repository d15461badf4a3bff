"""One console script per figure kind: --in CSV(s), --out image, --topn label."""

from __future__ import annotations

import argparse
import sys

from leakproof_figures.core import FigureSpec, SchemaError, render


def _run(kind: str, argv=None) -> int:
    parser = argparse.ArgumentParser(prog=f"fig-{kind}",
                                     description=f"Render a {kind} figure from report CSVs")
    parser.add_argument("--in", dest="inputs", nargs="+", required=True,
                        help="input report CSV file(s)")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--topn", type=int, default=20, help="list cutoff used in labels")
    args = parser.parse_args(argv)
    try:
        path = render(FigureSpec(kind=kind, inputs=tuple(args.inputs),
                                 output=args.out, topn=args.topn))
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    print(path)
    return 0


def main_popularity(argv=None) -> int:
    return _run("popularity", argv)


def main_active_periods(argv=None) -> int:
    return _run("active-periods", argv)


def main_weekly(argv=None) -> int:
    return _run("weekly", argv)


def main_similarity(argv=None) -> int:
    return _run("similarity", argv)


def main_accuracy_sweep(argv=None) -> int:
    return _run("accuracy-sweep", argv)
