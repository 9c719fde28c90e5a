"""Batch command-line interface.

Subcommands: stats, cmd, fid, itdis, retrieval, itm-loss. Every command
emits a machine-readable JSON report (stdout or --out). Exit codes: 0 on
success, 2 on data/validation errors, 64 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .cmd_metric import compute_cmd
from .embedding_io import (
    DTYPE_F32,
    STATS_MAGIC,
    TENSOR_MAGIC,
    load_bundle,
    read_stats,
    read_tensor,
    sniff_magic,
    write_stats,
)
from .errors import BadMagic, ShapeMismatch, T2IEvalError
from .itm_scoring import (
    DEFAULT_GAMMA,
    DEFAULT_GAMMA1,
    DEFAULT_GAMMA2,
    DEFAULT_LAMBDA1,
    DEFAULT_LAMBDA2,
    CaptionBundle,
    build_similarity_matrix,
    contrastive_loss,
    itm_total,
    rank_retrieval,
)
from .linalg_stats import GaussianStats, estimate_stats_sharded

EXIT_OK = 0
EXIT_DATA = 2
EXIT_USAGE = 64

REPORT_DECIMALS = 6


class _Parser(argparse.ArgumentParser):
    """argparse with BSD-style exit code 64 for usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _resolve_threads(value) -> int:
    if value is not None:
        return max(1, int(value))
    env = os.environ.get("T2IEVAL_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def _load_stats(path: str, threads: int, normalize: bool) -> GaussianStats:
    """Load a Gaussian-statistics input: either a precomputed .stats file or
    a raw rank-2 float tensor (detected by magic)."""
    magic = sniff_magic(path)
    if magic == STATS_MAGIC:
        return read_stats(path)
    if magic == TENSOR_MAGIC:
        dtype, dims, arr = read_tensor(path)
        if dtype != DTYPE_F32 or len(dims) != 2:
            raise ShapeMismatch(
                f"{path}: expected a rank-2 float tensor, got dtype={dtype} "
                f"shape={dims}"
            )
        x = arr.astype(np.float64)
        if normalize:
            norms = np.linalg.norm(x, axis=1, keepdims=True)
            norms[norms == 0.0] = 1.0
            x = x / norms
        return estimate_stats_sharded(x, threads=threads)
    raise BadMagic(f"{path}: unrecognized magic {magic!r}")


def _round_floats(obj, decimals: int):
    if isinstance(obj, float):
        return round(obj, decimals)
    if isinstance(obj, dict):
        return {k: _round_floats(v, decimals) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_round_floats(v, decimals) for v in obj]
    return obj


def _emit_report(args, command: str, body: dict, started: float) -> None:
    report = {
        "schema_version": 1,
        "tool_version": __version__,
        "command": command,
        **body,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "duration_seconds": time.monotonic() - started,
    }
    if not args.precise:
        for key in body:
            report[key] = _round_floats(report[key], REPORT_DECIMALS)
    text = json.dumps(report, indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --- subcommand bodies ---

def _run_stats(args) -> int:
    threads = _resolve_threads(args.threads)
    dtype, dims, arr = read_tensor(args.embeddings)
    if dtype != DTYPE_F32 or len(dims) != 2:
        raise ShapeMismatch(
            f"{args.embeddings}: expected a rank-2 float tensor, got shape {dims}"
        )
    stats = estimate_stats_sharded(arr.astype(np.float64), threads=threads)
    write_stats(args.out, stats)
    return EXIT_OK


def _cmd_body(args) -> tuple[dict, dict]:
    threads = _resolve_threads(args.threads)
    normalize = getattr(args, "normalize", False)
    f = _load_stats(args.fake, threads, normalize)
    r = _load_stats(args.real, threads, normalize)
    inputs = {"fake": args.fake, "real": args.real}
    counts = {"n_fake": f.n, "n_real": r.n, "d": f.dim}
    if getattr(args, "text", None):
        l = _load_stats(args.text, threads, normalize)
        inputs["text"] = args.text
        counts["n_text"] = l.n
    else:
        l = None
    report = compute_cmd(f, r, l if l is not None else r)
    body = {
        "inputs": inputs,
        "counts": counts,
        "hyperparameters": {"normalize": normalize, "threads": threads},
        "regularized": report.regularized,
    }
    values = {
        "dis_fr": report.dis_fr,
        "dis_fl": report.dis_fl,
        "dis_rl": report.dis_rl,
        "itdis": report.itdis,
        "cmd": report.cmd,
    }
    return body, values


def _run_cmd(args) -> int:
    started = time.monotonic()
    body, values = _cmd_body(args)
    body["values"] = values
    _emit_report(args, "cmd", body, started)
    return EXIT_OK


def _run_itdis(args) -> int:
    started = time.monotonic()
    body, values = _cmd_body(args)
    body["regularized"] = {
        k: v for k, v in body["regularized"].items() if k in ("fl", "rl")
    }
    body["values"] = {"itdis": values["itdis"]}
    _emit_report(args, "itdis", body, started)
    return EXIT_OK


def _run_fid(args) -> int:
    started = time.monotonic()
    args.text = None
    body, values = _cmd_body(args)
    body["regularized"] = {"fr": body["regularized"]["fr"]}
    body["values"] = {"fid": values["dis_fr"]}
    _emit_report(args, "fid", body, started)
    return EXIT_OK


def _bundle_to_caption_bundle(bundle) -> CaptionBundle:
    regions = words = None
    if bundle.regions is not None:
        regions = [bundle.regions[i] for i in range(bundle.m)]
        words = bundle.word_vector_list()
    return CaptionBundle(
        image_vectors=bundle.img.astype(np.float64),
        sentence_vectors=bundle.sent.astype(np.float64),
        region_features=regions,
        word_vectors=words,
    )


def _run_retrieval(args) -> int:
    started = time.monotonic()
    bundle = load_bundle(args.bundle, require_words=args.level == "word")
    cb = _bundle_to_caption_bundle(bundle)
    scores = build_similarity_matrix(
        cb, level=args.level, gamma1=args.gamma1, gamma2=args.gamma2
    )
    rep = rank_retrieval(scores)
    body = {
        "inputs": {"bundle": args.bundle},
        "counts": {"m": bundle.m, "d": bundle.dim},
        "hyperparameters": {
            "level": args.level, "gamma1": args.gamma1, "gamma2": args.gamma2,
        },
        "values": {
            "i2t": {"r1": rep.r1_i2t, "r5": rep.r5_i2t, "r10": rep.r10_i2t},
            "t2i": {"r1": rep.r1_t2i, "r5": rep.r5_t2i, "r10": rep.r10_t2i},
        },
    }
    _emit_report(args, "retrieval", body, started)
    return EXIT_OK


def _run_itm_loss(args) -> int:
    started = time.monotonic()
    bundle = load_bundle(args.bundle, require_words=True)
    cb = _bundle_to_caption_bundle(bundle)
    sent_scores = build_similarity_matrix(cb, level="sentence")
    word_scores = build_similarity_matrix(
        cb, level="word", gamma1=args.gamma1, gamma2=args.gamma2
    )
    l1s, l2s = contrastive_loss(sent_scores, gamma=args.gamma)
    l1w, l2w = contrastive_loss(word_scores, gamma=args.gamma)
    total = itm_total(l1s, l2s, l1w, l2w, args.lambda1, args.lambda2)
    body = {
        "inputs": {"bundle": args.bundle},
        "counts": {"m": bundle.m, "d": bundle.dim},
        "hyperparameters": {
            "gamma": args.gamma, "gamma1": args.gamma1, "gamma2": args.gamma2,
            "lambda1": args.lambda1, "lambda2": args.lambda2,
        },
        "values": {
            "l1_s": l1s, "l2_s": l2s, "l1_w": l1w, "l2_w": l2w, "total": total,
        },
    }
    _emit_report(args, "itm-loss", body, started)
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="t2ieval", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    common.add_argument("--precise", action="store_true",
                        help="full float precision in the report")
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: $T2IEVAL_THREADS or 1)")

    p = sub.add_parser("stats", parents=[common],
                       help="estimate Gaussian statistics and cache them")
    p.add_argument("--embeddings", required=True)
    p.set_defaults(func=_run_stats)

    for name, func, with_text in (
        ("cmd", _run_cmd, True),
        ("itdis", _run_itdis, True),
        ("fid", _run_fid, False),
    ):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("--fake", required=True,
                       help="generated-image embeddings (.grb) or stats (.stats)")
        p.add_argument("--real", required=True)
        if with_text:
            p.add_argument("--text", required=True)
        p.add_argument("--normalize", action="store_true",
                       help="L2-normalize raw embedding rows before statistics")
        p.set_defaults(func=func)

    p = sub.add_parser("retrieval", parents=[common])
    p.add_argument("--bundle", required=True)
    p.add_argument("--level", choices=("sentence", "word"), default="sentence")
    p.add_argument("--gamma1", type=float, default=DEFAULT_GAMMA1)
    p.add_argument("--gamma2", type=float, default=DEFAULT_GAMMA2)
    p.set_defaults(func=_run_retrieval)

    p = sub.add_parser("itm-loss", parents=[common])
    p.add_argument("--bundle", required=True)
    p.add_argument("--gamma", type=float, default=DEFAULT_GAMMA)
    p.add_argument("--gamma1", type=float, default=DEFAULT_GAMMA1)
    p.add_argument("--gamma2", type=float, default=DEFAULT_GAMMA2)
    p.add_argument("--lambda1", type=float, default=DEFAULT_LAMBDA1)
    p.add_argument("--lambda2", type=float, default=DEFAULT_LAMBDA2)
    p.set_defaults(func=_run_itm_loss)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "stats" and not args.out:
        parser.error("stats requires --out")
    try:
        return args.func(args)
    except T2IEvalError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
