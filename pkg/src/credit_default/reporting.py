"""JSON serialization of run reports."""

from __future__ import annotations

import json
import math

import numpy as np

# report keys holding wall-clock measurements
TIMING_KEYS = ("train_seconds", "timings", "seconds")


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, NaN/Inf to None, tuples to lists."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def report_json(report: dict) -> str:
    return json.dumps(_clean(report), indent=2, sort_keys=True, allow_nan=False) + "\n"


def strip_timings(report: dict):
    if isinstance(report, dict):
        return {k: strip_timings(v) for k, v in report.items() if k not in TIMING_KEYS}
    if isinstance(report, list):
        return [strip_timings(v) for v in report]
    return report
