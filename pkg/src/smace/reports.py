"""Deterministic JSON report serialization.

Floats are written with 17 significant digits, which round-trips 64-bit
values exactly, and dictionaries keep insertion order, so identical
inputs always serialize to identical bytes.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .aggregate import Explanation, rank
from .baselines import BaselineResult
from .errors import ConfigError


def format_float(value: float) -> str:
    if not math.isfinite(value):
        raise ValueError(f"reports may not contain non-finite numbers: {value!r}")
    return format(float(value), ".17g")


def emit_json(obj, indent: int = 0) -> str:
    """Serialize with stable key order and 17-significant-digit floats."""
    pad = " " * indent
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (list, tuple, np.ndarray)):
        items = [emit_json(v, indent + 2) for v in obj]
        if not items:
            return "[]"
        inner = ",\n".join(f"{pad}  {item}" for item in items)
        return f"[\n{inner}\n{pad}]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        parts = []
        for key, value in obj.items():
            parts.append(f"{pad}  {json.dumps(str(key))}: {emit_json(value, indent + 2)}")
        inner = ",\n".join(parts)
        return f"{{\n{inner}\n{pad}}}"
    raise TypeError(f"cannot serialize {type(obj).__name__} into a report")


def parse_report(text: str) -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed report JSON: {exc}") from exc


def explanation_to_dict(explanation: Explanation) -> dict:
    d = len(explanation.e)
    return {
        "instance": list(explanation.instance.values),
        "rule": explanation.rule,
        "outcome": explanation.outcome,
        "e": {name: float(v) for name, v in zip(explanation.input_names, explanation.e)},
        "r": {name: float(v) for name, v in zip(explanation.feature_names, explanation.r)},
        "phi_hat": {
            model: {
                name: float(v) for name, v in zip(explanation.input_names, vector)
            }
            for model, vector in explanation.phi_hat.items()
        },
        "ranking": [{"feature": name, "e": value} for name, value in rank(explanation)],
        "metadata": {
            "scaler_bounds": {
                name: [lo, hi]
                for name, (lo, hi) in explanation.metadata.scaler_bounds.items()
            },
            "attribution_backend": explanation.metadata.backend,
            "background_seed": explanation.metadata.background_seed,
            "background_size": explanation.metadata.background_size,
        },
    }


def explanation_report(explanation: Explanation) -> str:
    return emit_json(explanation_to_dict(explanation)) + "\n"


def comparison_to_dict(
    input_names, instance_values, results: dict[str, BaselineResult | np.ndarray]
) -> dict:
    columns = {}
    degenerate = {}
    for method, result in results.items():
        if isinstance(result, BaselineResult):
            columns[method] = {
                name: float(v) for name, v in zip(input_names, result.values)
            }
            if result.degenerate:
                degenerate[method] = True
        else:
            columns[method] = {name: float(v) for name, v in zip(input_names, result)}
    out = {
        "instance": {name: float(v) for name, v in zip(input_names, instance_values)},
        "methods": columns,
    }
    if degenerate:
        out["degenerate"] = degenerate
    return out
