"""Attack-vector report in the stable JSON layout."""

from __future__ import annotations

from .state import Verdict


def report_json(verdict: Verdict, property_source: str, timing: bool = True) -> dict:
    """``timing=False`` zeroes elapsed time so reports compare byte for byte."""
    stats = verdict.stats.to_json()
    if not timing:
        stats["elapsed_ms"] = 0
    vec = verdict.vector
    return {
        "verdict": verdict.kind,
        "reason": verdict.reason,
        "property": property_source,
        "vector": vec.to_json() if vec is not None else [],
        "violating_index": vec.violating_index if vec is not None else None,
        "stats": stats,
    }
