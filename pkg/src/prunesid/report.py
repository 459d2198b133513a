"""Canonical JSON selection reports.

Reports are serialized deterministically: keys sorted, floats printed at 9
significant digits, compact separators. Writing the same in-memory report
twice therefore produces byte-identical files, which makes diff-based
testing possible.
"""

import json
import math

import numpy as np

from .errors import ValidationError
from .pruning import CompressionResult

SCHEMA_VERSION = 1


def _canonical(value, out: list[str]) -> None:
    if value is None:
        out.append("null")
    elif value is True:
        out.append("true")
    elif value is False:
        out.append("false")
    elif isinstance(value, (int, np.integer)):
        out.append(str(int(value)))
    elif isinstance(value, (float, np.floating)):
        f = float(value)
        if not math.isfinite(f):
            raise ValidationError(f"cannot serialize non-finite float {f}")
        out.append(f"{f:.9g}")
    elif isinstance(value, str):
        out.append(json.dumps(value, ensure_ascii=True))
    elif isinstance(value, dict):
        out.append("{")
        for i, key in enumerate(sorted(value)):
            if not isinstance(key, str):
                raise ValidationError(f"report keys must be strings, got {key!r}")
            if i:
                out.append(",")
            out.append(json.dumps(key, ensure_ascii=True))
            out.append(":")
            _canonical(value[key], out)
        out.append("}")
    elif isinstance(value, (list, tuple, np.ndarray)):
        out.append("[")
        for i, item in enumerate(value):
            if i:
                out.append(",")
            _canonical(item, out)
        out.append("]")
    else:
        raise ValidationError(f"cannot serialize {type(value).__name__} in a report")


def canonical_json(obj) -> str:
    """Deterministic JSON: sorted keys, %.9g floats, compact separators."""
    out: list[str] = []
    _canonical(obj, out)
    return "".join(out)


def build_selection_report(
    result: CompressionResult,
    image_id: str = "",
    include_timing: bool = True,
) -> dict:
    """Flatten a compression result into a report dictionary.

    Timing is wall-clock and therefore varies run to run; pass
    ``include_timing=False`` when byte-stable output matters more than the
    profile.
    """
    sel = result.selection
    pre = [int(v) for v in np.bincount(result.assignment.group_of, minlength=result.K)]
    report = {
        "schema_version": SCHEMA_VERSION,
        "image_id": image_id,
        "T": result.T,
        "D": result.D,
        "N": result.N,
        "K": result.K,
        "alpha": result.stats.alpha,
        "lambda": result.stats.lam,
        "rho": result.stats.rho,
        "phi": result.stats.phi,
        "tau": result.stats.tau,
        "retained": [int(i) for i in sel.retained],
        "quotas": [int(q) for q in sel.quotas],
        "group_sizes_pre_nms": pre,
        "group_sizes_post_nms": [int(s) for s in sel.survivors_per_group],
        "backfilled": [int(i) for i in sel.backfilled],
        "identity_selection": bool(result.identity_selection),
        "config": dict(result.config),
    }
    if result.note:
        report["note"] = result.note
    if len(sel.retained) == 0:
        report["warning"] = "no tokens retained"
    if include_timing and result.timing_us:
        report["timing_us"] = {k: int(v) for k, v in result.timing_us.items()}
    return report


def write_selection_report(report: dict, path) -> None:
    """Write a report as canonical JSON (plus a trailing newline)."""
    text = canonical_json(report) + "\n"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
