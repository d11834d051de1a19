"""Small shared runtime helpers."""

from __future__ import annotations

import os


def thread_cap() -> int:
    """Worker count for pass-2 scoring and per-seed evaluation fan-out.

    Controlled by SKETCH_ANOMALY_THREADS; 0 or unset means auto
    (min(4, cpu count)).  Values below 1 after parsing fall back to 1.
    """
    raw = os.environ.get("SKETCH_ANOMALY_THREADS", "0")
    try:
        val = int(raw)
    except ValueError:
        val = 0
    if val <= 0:
        return max(1, min(4, os.cpu_count() or 1))
    return val
