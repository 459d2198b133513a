"""Command-line interface.

Subcommands:
    compress  one token file -> one selection report
    batch     manifest of token files -> per-image reports + dataset summary
    oracle    desk-scale strategy comparison against the exhaustive optimum

Exit codes: 0 success, 1 validation/parameter error, 2 I/O error. Errors go
to stderr prefixed with "error:". The PRUNESID_LOG environment variable
(quiet|info|debug) controls diagnostics on stderr.
"""

import argparse
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import brute_force_best_subset, importance_only_select, informativeness_objective
from .batch import load_manifest, run_batch
from .errors import ParameterError, PruneSidError
from .pruning import DEFAULT_ALPHA, compress
from .report import build_selection_report, canonical_json, write_selection_report
from .tensor import pairwise_similarity
from .tokfile import FORMATS, read_token_matrix

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2

log = logging.getLogger("prunesid")


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems are validation errors, not I/O
        self.exit(EXIT_VALIDATION, f"error: {message}\n")


def _configure_logging() -> None:
    level = {"quiet": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}
    name = os.environ.get("PRUNESID_LOG", "quiet").lower()
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
    root = logging.getLogger("prunesid")
    root.handlers[:] = [handler]
    root.setLevel(level.get(name, logging.WARNING))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="prunesid", description=__doc__)
    parser.add_argument("--version", action="version", version=f"prunesid {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compress", help="compress one token file")
    p.add_argument("--input", required=True, help="token file (tokm or csv)")
    p.add_argument("--budget", required=True, type=int, help="tokens to retain")
    p.add_argument("--groups", type=int, default=None, help="group count (default budget // 4)")
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA,
                   help="threshold divisor: scale = budget / alpha")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=FORMATS, default=None,
                   help="input format (default: by extension)")
    p.add_argument("--output", default=None,
                   help="report path (default: <input>.report.json)")
    p.add_argument("--sim", choices=("raw", "rescaled"), default="raw",
                   help="embeddings used for similarity")

    p = sub.add_parser("batch", help="compress every image in a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--avg-budget", type=int, default=None,
                   help="dataset-average retained tokens (or manifest config)")
    p.add_argument("--dynamic", action="store_true", default=None,
                   help="allocate per-image budgets by information score")
    p.add_argument("--min-budget", type=int, default=None, help="per-image floor (default 16)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out-dir", default="reports")

    p = sub.add_parser("oracle", help="compare strategies against the exhaustive optimum")
    p.add_argument("--input", required=True)
    p.add_argument("--budget", required=True, type=int)
    p.add_argument("--trials", required=True, type=int,
                   help="random-subset baselines to draw")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=FORMATS, default=None)
    p.add_argument("--output", default=None, help="write the comparison JSON here too")
    return parser


def _cmd_compress(args) -> int:
    t0 = time.perf_counter_ns()
    matrix = read_token_matrix(args.input, args.format)
    read_us = (time.perf_counter_ns() - t0) // 1000
    result = compress(
        matrix,
        args.budget,
        K=args.groups,
        alpha=args.alpha,
        seed=args.seed,
        similarity_source=args.sim,
    )
    result.timing_us["read_us"] = read_us
    report = build_selection_report(result, image_id=Path(args.input).stem)
    out = args.output or f"{args.input}.report.json"
    write_selection_report(report, out)
    print(out)
    return EXIT_OK


def _cmd_batch(args) -> int:
    manifest = load_manifest(args.manifest)
    summary = run_batch(
        manifest,
        args.out_dir,
        avg_budget=args.avg_budget,
        dynamic=args.dynamic,
        min_budget=args.min_budget,
        jobs=args.jobs,
    )
    print(str(Path(args.out_dir) / "summary.json"))
    if summary["failures"]:
        for image_id, message in summary["failures"].items():
            print(f"error: {image_id}: {message}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def _rates(ours: float, others: list[float]) -> dict:
    wins = sum(1 for j in others if ours > j)
    ties = sum(1 for j in others if ours == j)
    n = len(others)
    return {
        "win_rate": wins / n,
        "tie_rate": ties / n,
        "loss_rate": (n - wins - ties) / n,
    }


def _cmd_oracle(args) -> int:
    if args.trials < 1:
        raise ParameterError(f"trials must be >= 1, got {args.trials}")
    matrix = read_token_matrix(args.input, args.format)
    T, D = matrix.shape
    N = args.budget

    result = compress(matrix, min(N, T), seed=args.seed)
    scores = result.assignment.scores
    sims = pairwise_similarity(matrix)

    def J(indices) -> float:
        return informativeness_objective(indices, scores, sims).J

    j_ours = J(result.selection.retained)
    j_ascend = J(importance_only_select(matrix, min(N, T), "ascend",
                                        K=result.K, seed=args.seed).retained)
    j_descend = J(importance_only_select(matrix, min(N, T), "descend",
                                         K=result.K, seed=args.seed).retained)
    best_subset, j_best = brute_force_best_subset(
        matrix, min(N, T), scores=scores, S=sims
    )

    j_random = []
    for trial in range(args.trials):
        rng = np.random.default_rng([args.seed, trial])
        j_random.append(J(np.sort(rng.choice(T, size=min(N, T), replace=False))))

    comparison = {
        "T": T,
        "D": D,
        "N": int(min(N, T)),
        "trials": args.trials,
        "J": {
            "compress": j_ours,
            "ascend": j_ascend,
            "descend": j_descend,
            "brute_force": j_best,
            "random_mean": float(np.mean(j_random)),
            "random": j_random,
        },
        "best_subset": [int(i) for i in best_subset],
        "win_rate_vs_random": _rates(j_ours, j_random)["win_rate"],
        "vs_random": _rates(j_ours, j_random),
        "vs_ascend": _rates(j_ours, [j_ascend]),
        "vs_descend": _rates(j_ours, [j_descend]),
        "ratio_to_brute_force": (j_ours / j_best) if j_best != 0 else None,
    }
    text = canonical_json(comparison)
    print(text)
    if args.output:
        Path(args.output).write_text(text + "\n", encoding="utf-8")
    return EXIT_OK


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handlers = {"compress": _cmd_compress, "batch": _cmd_batch, "oracle": _cmd_oracle}
    try:
        return handlers[args.command](args)
    except PruneSidError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
