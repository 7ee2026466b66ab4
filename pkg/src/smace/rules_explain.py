"""Signed rule contributions from boundary distances.

Under single-feature conditions the decision surface of a rule splits
into one axis-aligned component per constrained feature, and the nearest
point on a component is the threshold itself. The contribution of a
feature is 1 minus its scaled distance to that boundary, positive when
the condition holds and negative when it is violated, so values close to
a boundary dominate the explanation.
"""

from __future__ import annotations

import numpy as np

from .core import CompletedInstance, DecisionSystem, FeatureId, Rule
from .errors import DimensionError
from .scaling import Scaler


def rule_contribution(
    rule: Rule,
    feature: FeatureId,
    completed: CompletedInstance,
    scaler: Scaler,
) -> float:
    """Signed contribution of one feature to the explained rule.

    Features without conditions contribute exactly 0. With several
    conditions on the same feature (interval rules), the nearest boundary
    wins: any violated condition makes the result -max(1 - d) over the
    violated ones, otherwise it is +max(1 - d) over all of them.
    """
    conditions = rule.conditions_on(feature)
    if not conditions:
        return 0.0
    if feature.index >= len(completed):
        raise DimensionError(
            f"feature {feature.name!r} (index {feature.index}) is out of range for a "
            f"completed vector of length {len(completed)}"
        )
    raw_value = float(completed.values[feature.index])
    scaled_value = scaler.scale(feature, raw_value)

    satisfied_best = None
    violated_best = None
    for cond in conditions:
        scaled_threshold = scaler.scale(feature, cond.threshold)
        distance = min(1.0, abs(scaled_value - scaled_threshold))
        magnitude = 1.0 - distance
        if cond.holds(raw_value):
            if satisfied_best is None or magnitude > satisfied_best:
                satisfied_best = magnitude
        else:
            if violated_best is None or magnitude > violated_best:
                violated_best = magnitude
    if violated_best is not None:
        return -violated_best
    assert satisfied_best is not None
    return satisfied_best


def rule_contributions(
    system: DecisionSystem,
    rule: Rule,
    completed: CompletedInstance,
    scaler: Scaler,
) -> np.ndarray:
    """Contribution of every feature, inputs then internals (length D+N)."""
    if len(completed) != len(system.all_features):
        raise DimensionError(
            f"completed vector has {len(completed)} values, system has "
            f"{len(system.all_features)} features"
        )
    return np.array(
        [rule_contribution(rule, f, completed, scaler) for f in system.all_features]
    )
