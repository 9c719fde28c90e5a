"""t2iextract command line: `run` extracts bundles with a local encoder,
`synthesize` generates seeded Gaussian fixture bundles."""

from __future__ import annotations

import argparse
import sys

from .extract import ExtractionConfig, ExtractionError, extract
from .synth import synthesize


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="t2iextract", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="extract a bundle from images + captions")
    p.add_argument("--config", required=True,
                   help="JSON file with ExtractionConfig fields")

    p = sub.add_parser("synthesize", help="generate a synthetic fixture bundle")
    p.add_argument("--m", type=int, required=True, help="number of pairs")
    p.add_argument("--d", type=int, required=True, help="feature dimension")
    p.add_argument("--r", type=int, default=4, help="regions per image")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--planted-rank", type=int, default=None,
                   help="make each caption's true image rank exactly K-th")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            out = extract(ExtractionConfig.from_json(args.config))
        else:
            out = synthesize(
                m=args.m, d=args.d, r=args.r, seed=args.seed,
                out_dir=args.out, planted_rank=args.planted_rank,
            )
    except (ExtractionError, ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
