"""Whole-system black-box explainers used for comparison.

Both baselines treat the composite pipeline (models plus policy) as one
function from raw inputs to a numeric outcome. They are deterministic
reimplementations: every random draw is seeded and recorded, so reruns
are bit-identical. Near a decision boundary they exhibit the flat or
degenerate behavior that motivates the rule-aware method.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import DecisionPolicy, DecisionSystem, Outcome, as_instance, complete_batch
from .errors import DimensionError, TooManyFeatures
from .scaling import Scaler

MAX_ENUMERATED_FEATURES = 15


@dataclass(frozen=True)
class LimeConfig:
    """Perturbation study settings; stddev and kernel width are in scaled
    units. A kernel_width of None means 0.75 * sqrt(D)."""

    num_samples: int = 5000
    kernel_width: float | None = None
    perturbation_stddev: float = 0.1

    def __post_init__(self):
        if self.num_samples < 100:
            raise ValueError("num_samples must be >= 100")
        if self.perturbation_stddev <= 0:
            raise ValueError("perturbation_stddev must be positive")
        if self.kernel_width is not None and self.kernel_width <= 0:
            raise ValueError("kernel_width must be positive when given")


@dataclass(frozen=True)
class BaselineConfig:
    method: str = "shap"  # "shap" | "lime"
    seed: int = 0
    background_size: int = 100
    lime: LimeConfig = field(default_factory=LimeConfig)

    def __post_init__(self):
        if self.background_size < 1:
            raise ValueError("background_size must be >= 1")


@dataclass(frozen=True)
class BaselineResult:
    """Attribution over the D input features. ``degenerate`` flags a
    perturbation study whose samples all produced the same label."""

    method: str
    values: np.ndarray
    degenerate: bool = False
    base_value: float | None = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)


def outcome_values(policy: DecisionPolicy) -> dict[Outcome, float]:
    """Numeric encoding of outcome labels. Numeric labels keep their value;
    otherwise labels are numbered by first appearance (rules, then default)."""
    labels: list[Outcome] = []
    for rule in policy.rules:
        if rule.consequence not in labels:
            labels.append(rule.consequence)
    if policy.default_outcome not in labels:
        labels.append(policy.default_outcome)
    if all(isinstance(lbl, (int, float)) and not isinstance(lbl, bool) for lbl in labels):
        return {lbl: float(lbl) for lbl in labels}
    return {lbl: float(i) for i, lbl in enumerate(labels)}


def numeric_outcome(policy: DecisionPolicy, outcome: Outcome) -> float:
    return outcome_values(policy)[outcome]


def _numeric_outcomes_batch(system: DecisionSystem, X: np.ndarray) -> np.ndarray:
    """Vectorized first-match policy evaluation to numeric outcomes."""
    values = outcome_values(system.policy)
    completed = complete_batch(system, X)
    q = completed.shape[0]
    out = np.full(q, values[system.policy.default_outcome])
    assigned = np.zeros(q, dtype=bool)
    for rule in system.policy.rules:
        mask = np.ones(q, dtype=bool)
        for cond in rule.conditions:
            mask &= cond.op.holds_batch(completed[:, cond.feature.index], cond.threshold)
        fresh = mask & ~assigned
        out[fresh] = values[rule.consequence]
        assigned |= mask
    return out


def _input_bounds(system: DecisionSystem, scaler: Scaler) -> tuple[np.ndarray, np.ndarray]:
    lows, highs = [], []
    for name in system.input_names:
        lo, hi = scaler.bounds_for(name)
        lows.append(lo)
        highs.append(hi)
    return np.asarray(lows), np.asarray(highs)


def system_shapley(
    system: DecisionSystem, instance, scaler: Scaler, config: BaselineConfig
) -> BaselineResult:
    """Exact interventional Shapley of the composite function.

    The background is uniform over the scaler's per-feature input ranges,
    drawn with PCG64(seed); the subset enumeration is capped at 15 inputs.
    """
    inst = as_instance(instance)
    d = system.n_inputs
    if len(inst) != d:
        raise DimensionError(f"instance has {len(inst)} values, system expects {d}")
    if d > MAX_ENUMERATED_FEATURES:
        raise TooManyFeatures(
            f"system has {d} input features; exact enumeration is capped at "
            f"{MAX_ENUMERATED_FEATURES}"
        )
    rng = np.random.Generator(np.random.PCG64(config.seed))
    lo, hi = _input_bounds(system, scaler)
    background = lo + (hi - lo) * rng.random((config.background_size, d))

    values = np.empty(1 << d)
    for mask in range(1 << d):
        mixed = background.copy()
        for j in range(d):
            if mask >> j & 1:
                mixed[:, j] = inst.values[j]
        values[mask] = float(np.mean(_numeric_outcomes_batch(system, mixed)))

    weights = [
        math.factorial(s) * math.factorial(d - s - 1) / math.factorial(d)
        for s in range(d)
    ]
    phi = np.zeros(d)
    for j in range(d):
        bit = 1 << j
        acc = 0.0
        for mask in range(1 << d):
            if mask & bit:
                continue
            acc += weights[bin(mask).count("1")] * (values[mask | bit] - values[mask])
        phi[j] = acc
    return BaselineResult("shap", phi, base_value=float(values[0]))


def system_lime(
    system: DecisionSystem, instance, scaler: Scaler, config: BaselineConfig
) -> BaselineResult:
    """Local linear surrogate fit on Gaussian perturbations.

    Samples are drawn around the scaled instance, mapped back to raw units
    for labeling, and weighted with an exponential kernel on scaled
    distance. If every sampled label is identical the regression is
    degenerate and the result is all zeros with ``degenerate=True``.
    """
    inst = as_instance(instance)
    d = system.n_inputs
    if len(inst) != d:
        raise DimensionError(f"instance has {len(inst)} values, system expects {d}")
    rng = np.random.Generator(np.random.PCG64(config.seed))
    lo, hi = _input_bounds(system, scaler)
    span = hi - lo

    center = np.array([scaler.scale(n, v) for n, v in zip(system.input_names, inst.values)])
    scaled = center + config.lime.perturbation_stddev * rng.standard_normal(
        (config.lime.num_samples, d)
    )
    raw = lo + scaled * span
    labels = _numeric_outcomes_batch(system, raw)
    if np.all(labels == labels[0]):
        return BaselineResult("lime", np.zeros(d), degenerate=True)

    kernel_width = (
        config.lime.kernel_width if config.lime.kernel_width is not None
        else 0.75 * math.sqrt(d)
    )
    sq_dist = ((scaled - center) ** 2).sum(axis=1)
    weights = np.exp(-sq_dist / kernel_width**2)
    sqrt_w = np.sqrt(weights)
    design = np.column_stack([np.ones(len(scaled)), scaled])
    beta, *_ = np.linalg.lstsq(design * sqrt_w[:, None], labels * sqrt_w, rcond=None)
    return BaselineResult("lime", beta[1:], base_value=float(beta[0]))


def run_baseline(
    method: str, system: DecisionSystem, instance, scaler: Scaler, config: BaselineConfig
) -> BaselineResult:
    if method == "shap":
        return system_shapley(system, instance, scaler, config)
    if method == "lime":
        return system_lime(system, instance, scaler, config)
    raise ValueError(f"unknown baseline method {method!r}; choose 'shap' or 'lime'")
