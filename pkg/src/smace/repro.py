"""Built-in benchmark cases on seeded synthetic data.

Each case builds a small reference system, generates 1000 uniform rows in
[0, 1]^3 from PCG64(seed), explains a fixed instance, and checks the
result against frozen expected values. ``analytic`` mode replaces the
fitted scaler with closed-form feature ranges (and the attribution
background with the range-midpoint row), which makes the expected values
exact instead of sampling-dependent.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .aggregate import Explanation, explain
from .core import (
    DecisionPolicy,
    DecisionSystem,
    FeatureId,
    FeatureKind,
    LinearBackend,
    Model,
)
from .dsl import parse_rule
from .io import generate_uniform_dataset
from .models_explain import ExactShapleyEngine
from .scaling import Dataset, Scaler, fit_scaler

DEFAULT_SEED = 0
REFERENCE_ROWS = 1000

ANALYTIC_TOLERANCE = 1e-9
EMPIRICAL_TOLERANCE = 0.02

GENERIC_INSTANCE = (0.6, 0.1, 0.4)
VIOLATION_INSTANCE = (0.51, 0.6, 0.2)

RULES_GENERIC_E = (-0.9, -0.5, 0.8)
RULES_VIOLATION_E = (-0.99, 1.0, 1.0)
HYBRID_R = (-0.90, -0.50, 0.00, -0.87, 0.86)
HYBRID_R_ANALYTIC = (-0.9, -0.5, 0.0, -0.8666666666666667, 0.8727272727272727)


def _input_features() -> tuple[FeatureId, ...]:
    return tuple(
        FeatureId(i, name, FeatureKind.INPUT) for i, name in enumerate(("x1", "x2", "x3"))
    )


def make_reference_dataset(seed: int = DEFAULT_SEED, n_rows: int = REFERENCE_ROWS) -> Dataset:
    return generate_uniform_dataset(("x1", "x2", "x3"), n_rows, seed)


def rules_only_system() -> DecisionSystem:
    """Three threshold conditions on three input features, no models."""
    features = _input_features()
    feature_map = {f.name: f for f in features}
    parsed = parse_rule(
        "if x1 <= 0.5 and x2 >= 0.6 and x3 >= 0.2 then 1 else 0", feature_map, name="R1"
    )
    policy = DecisionPolicy((parsed.rule,), parsed.default_outcome)
    return DecisionSystem(features, (), policy)


def hybrid_system() -> DecisionSystem:
    """Two linear models feeding a rule that mixes input and internal
    conditions: m1 = 2*x2 + x3 and m2 = 700*x1 + 1000*x2 - 500*x3."""
    features = _input_features()
    by_name = {f.name: f for f in features}
    m1 = Model("m1", (by_name["x2"], by_name["x3"]), LinearBackend((2.0, 1.0)))
    m2 = Model(
        "m2",
        (by_name["x1"], by_name["x2"], by_name["x3"]),
        LinearBackend((700.0, 1000.0, -500.0)),
    )
    feature_map = dict(by_name)
    feature_map["m1"] = FeatureId(3, "m1", FeatureKind.INTERNAL)
    feature_map["m2"] = FeatureId(4, "m2", FeatureKind.INTERNAL)
    parsed = parse_rule(
        "if x1 <= 0.5 and x2 >= 0.6 and m1 >= 1 and m2 <= 600 then 1 else 0",
        feature_map,
        name="R3",
    )
    policy = DecisionPolicy((parsed.rule,), parsed.default_outcome)
    return DecisionSystem(features, (m1, m2), policy)


def analytic_bounds(system: DecisionSystem) -> Scaler:
    """Closed-form ranges: inputs span [0, 1]; linear model ranges follow
    from interval arithmetic over their coefficients."""
    bounds: dict[str, tuple[float, float]] = {name: (0.0, 1.0) for name in system.input_names}
    for model in system.models:
        if not isinstance(model.backend, LinearBackend):
            raise ValueError("analytic bounds are defined for linear backends only")
        lo = hi = model.backend.intercept
        for c in model.backend.coefficients:
            lo += min(c, 0.0)
            hi += max(c, 0.0)
        bounds[model.name] = (lo, hi)
    return Scaler(bounds)


def analytic_background(system: DecisionSystem) -> Dataset:
    """The midpoint of the analytic input ranges, as a one-row background."""
    return Dataset(system.input_names, np.full((1, system.n_inputs), 0.5))


@dataclass(frozen=True)
class Check:
    label: str
    actual: float
    expected: float
    tolerance: float

    @property
    def ok(self) -> bool:
        return abs(self.actual - self.expected) <= self.tolerance


@dataclass(frozen=True)
class CaseResult:
    case: str
    seed: int
    analytic: bool
    explanation: Explanation
    checks: tuple[Check, ...]
    elapsed_seconds: float

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)


def run_case(case: str, seed: int = DEFAULT_SEED, analytic: bool = False) -> CaseResult:
    if case not in CASE_NAMES:
        raise ValueError(f"unknown case {case!r}; choose from {sorted(CASE_NAMES)}")
    start = time.perf_counter()
    if case == "hybrid":
        system = hybrid_system()
        instance = GENERIC_INSTANCE
    else:
        system = rules_only_system()
        instance = GENERIC_INSTANCE if case == "rules-generic" else VIOLATION_INSTANCE

    if analytic:
        scaler = analytic_bounds(system)
        background = analytic_background(system)
    else:
        dataset = make_reference_dataset(seed)
        scaler = fit_scaler(system, dataset)
        background = dataset
    engine = ExactShapleyEngine(background, seed=seed)
    explanation = explain(system, scaler, instance, rule=None, engine=engine)
    elapsed = time.perf_counter() - start

    tolerance = ANALYTIC_TOLERANCE if analytic else EMPIRICAL_TOLERANCE
    if case == "rules-generic":
        expected = RULES_GENERIC_E
        checks = tuple(
            Check(f"e[{name}]", float(v), exp, tolerance)
            for name, v, exp in zip(explanation.input_names, explanation.e, expected)
        )
    elif case == "rules-violation":
        expected = RULES_VIOLATION_E
        checks = tuple(
            Check(f"e[{name}]", float(v), exp, tolerance)
            for name, v, exp in zip(explanation.input_names, explanation.e, expected)
        )
    else:
        expected = HYBRID_R_ANALYTIC if analytic else HYBRID_R
        checks = tuple(
            Check(f"r[{name}]", float(v), exp, tolerance)
            for name, v, exp in zip(explanation.feature_names, explanation.r, expected)
        )
    return CaseResult(case, seed, analytic, explanation, checks, elapsed)


CASE_NAMES = ("rules-generic", "rules-violation", "hybrid")
