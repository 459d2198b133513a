"""Manifest-driven batch compression.

Pass 1 reads every token file and computes its information score; if dynamic
budgeting is on, a budget plan proportional to those scores is built under
the dataset-average constraint. Pass 2 compresses each image under its
budget and writes one report per image plus a dataset summary.
"""

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .budget import (
    DEFAULT_MIN_BUDGET,
    allocate_dynamic_budgets,
    information_histogram,
    information_score,
)
from .errors import FormatError, ParameterError
from .pruning import DEFAULT_ALPHA, compress, mean_pairwise_similarity
from .report import build_selection_report, canonical_json, write_selection_report
from .tokfile import read_token_matrix

log = logging.getLogger(__name__)

HISTOGRAM_BINS = 10


@dataclass
class ManifestEntry:
    image_id: str
    path: Path
    format: str | None = None


@dataclass
class Manifest:
    entries: list[ManifestEntry]
    config: dict


def load_manifest(path) -> Manifest:
    base = Path(path).parent
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON: {exc}") from None
    images = raw.get("images", [])
    if not isinstance(images, list) or not images:
        raise FormatError(f"{path}: manifest has no images")
    entries = []
    seen = set()
    for i, item in enumerate(images):
        if "id" not in item or "path" not in item:
            raise FormatError(f"{path}: images[{i}] needs 'id' and 'path'")
        image_id = str(item["id"])
        if image_id in seen:
            raise FormatError(f"{path}: duplicate image id {image_id!r}")
        seen.add(image_id)
        p = Path(item["path"])
        if not p.is_absolute():
            p = base / p
        entries.append(ManifestEntry(image_id, p, item.get("format")))
    config = raw.get("config", {})
    if not isinstance(config, dict):
        raise FormatError(f"{path}: manifest config must be an object")
    return Manifest(entries=entries, config=config)


def run_batch(
    manifest: Manifest,
    out_dir,
    avg_budget: int | None = None,
    dynamic: bool | None = None,
    min_budget: int | None = None,
    jobs: int = 1,
    alpha: float | None = None,
    seed: int | None = None,
    K: int | None = None,
    similarity_source: str | None = None,
) -> dict:
    """Two-pass batch compression; returns the dataset summary dict.

    Explicit arguments override the manifest's config block. Per-image
    failures are recorded in the summary instead of aborting the run.
    """
    cfg = manifest.config
    avg_budget = avg_budget if avg_budget is not None else cfg.get("avg_budget")
    if avg_budget is None:
        raise ParameterError("no average budget given (flag or manifest config)")
    avg_budget = int(avg_budget)
    dynamic = dynamic if dynamic is not None else bool(cfg.get("dynamic", False))
    min_budget = (
        min_budget
        if min_budget is not None
        else int(cfg.get("n_min", DEFAULT_MIN_BUDGET))
    )
    alpha = float(alpha if alpha is not None else cfg.get("alpha", DEFAULT_ALPHA))
    seed = int(seed if seed is not None else cfg.get("seed", 0))
    K = K if K is not None else cfg.get("K")
    similarity_source = similarity_source or cfg.get("similarity_source", "raw")

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def _pass1(entry: ManifestEntry):
        matrix = read_token_matrix(entry.path, entry.format)
        rho = mean_pairwise_similarity(matrix)
        return matrix, information_score(rho)

    entries = manifest.entries
    matrices: list[np.ndarray | None] = [None] * len(entries)
    phis: list[float | None] = [None] * len(entries)
    failures: dict[str, str] = {}

    def _safe_pass1(i: int):
        try:
            matrices[i], phis[i] = _pass1(entries[i])
        except Exception as exc:
            failures[entries[i].image_id] = f"{type(exc).__name__}: {exc}"

    _map(jobs, _safe_pass1, range(len(entries)))

    ok = [i for i in range(len(entries)) if entries[i].image_id not in failures]
    if dynamic and ok:
        plan = allocate_dynamic_budgets(
            [phis[i] for i in ok],
            avg_budget,
            n_min=min_budget,
            caps=[matrices[i].shape[0] for i in ok],
            image_ids=[entries[i].image_id for i in ok],
        )
        budget_of = {item.image_id: item.n_prime for item in plan.per_image}
    else:
        budget_of = {entries[i].image_id: avg_budget for i in ok}

    results: list[dict | None] = [None] * len(entries)

    def _pass2(i: int):
        entry = entries[i]
        if entry.image_id in failures:
            return
        try:
            res = compress(
                matrices[i],
                budget_of[entry.image_id],
                K=K,
                alpha=alpha,
                seed=seed,
                similarity_source=similarity_source,
            )
            report = build_selection_report(res, image_id=entry.image_id)
            report_path = out_dir / f"{entry.image_id}.report.json"
            write_selection_report(report, report_path)
            results[i] = {
                "id": entry.image_id,
                "phi": float(phis[i]),
                "n_prime": int(budget_of[entry.image_id]),
                "retained_count": len(res.selection.retained),
                "report": report_path.name,
            }
            log.info("compressed %s: %d -> %d tokens", entry.image_id,
                     res.T, len(res.selection.retained))
        except Exception as exc:
            failures[entry.image_id] = f"{type(exc).__name__}: {exc}"

    _map(jobs, _pass2, range(len(entries)))

    done = [r for r in results if r is not None]
    phi_ok = [r["phi"] for r in done]
    n_ok = [r["n_prime"] for r in done]
    summary = {
        "schema_version": 1,
        "images": done,
        "failures": {k: failures[k] for k in sorted(failures)},
        "dynamic": bool(dynamic),
        "target_avg": avg_budget,
        "n_min": int(min_budget),
        "phi_histogram": _phi_histogram(phi_ok),
        "n_prime_mean": float(np.mean(n_ok)) if n_ok else 0.0,
        "n_prime_std": float(np.std(n_ok)) if n_ok else 0.0,
    }
    summary_path = out_dir / "summary.json"
    summary_path.write_text(canonical_json(summary) + "\n", encoding="utf-8")
    return summary


def _phi_histogram(phis: list[float]) -> dict:
    if not phis:
        return {"counts": [], "bin_edges": []}
    counts = information_histogram(phis, HISTOGRAM_BINS)
    lo, hi = min(phis), max(phis)
    if lo == hi:
        edges = [lo, hi]
    else:
        edges = np.linspace(lo, hi, HISTOGRAM_BINS + 1).tolist()
    return {"counts": [int(c) for c in counts], "bin_edges": edges}


def _map(jobs: int, fn, items) -> None:
    if jobs <= 1:
        for item in items:
            fn(item)
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(fn, items))
