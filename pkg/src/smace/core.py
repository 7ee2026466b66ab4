"""Domain types for composite decision systems.

A system has D input features, N models producing one internal feature
each (indices D..D+N-1), and an ordered policy of conjunctive threshold
rules evaluated first-match with an explicit default outcome. All types
are immutable after construction; the operations are pure.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from typing import Union

import numpy as np

from .errors import (
    DimensionError,
    ExternalModelError,
    ModelEvaluationError,
    UnknownFeature,
)
from .external import ExternalModelClient, ExternalModelSpec

Outcome = Union[str, int, float]


class FeatureKind(enum.Enum):
    INPUT = "input"
    INTERNAL = "internal"


@dataclass(frozen=True)
class FeatureId:
    """A feature slot: inputs occupy [0, D), internal features [D, D+N)."""

    index: int
    name: str
    kind: FeatureKind

    def __post_init__(self):
        if self.index < 0:
            raise ValueError(f"feature index must be >= 0, got {self.index}")


class ComparisonOp(enum.Enum):
    """Threshold comparison. GE/LE are closed, GT/LT strict for evaluation;
    all four share the same boundary geometry."""

    GE = ">="
    LE = "<="
    GT = ">"
    LT = "<"

    @property
    def symbol(self) -> str:
        return self.value

    def holds(self, value: float, threshold: float) -> bool:
        if self is ComparisonOp.GE:
            return value >= threshold
        if self is ComparisonOp.LE:
            return value <= threshold
        if self is ComparisonOp.GT:
            return value > threshold
        return value < threshold

    def holds_batch(self, values: np.ndarray, threshold: float) -> np.ndarray:
        ufunc = {
            ComparisonOp.GE: np.greater_equal,
            ComparisonOp.LE: np.less_equal,
            ComparisonOp.GT: np.greater,
            ComparisonOp.LT: np.less,
        }[self]
        return ufunc(values, threshold)


@dataclass(frozen=True)
class Condition:
    """A single-feature threshold test, e.g. ``x2 >= 0.6``."""

    feature: FeatureId
    op: ComparisonOp
    threshold: float

    def __post_init__(self):
        object.__setattr__(self, "threshold", float(self.threshold))

    def holds(self, value: float) -> bool:
        return self.op.holds(value, self.threshold)

    def __str__(self) -> str:
        return f"{self.feature.name} {self.op.symbol} {_format_number(self.threshold)}"


@dataclass(frozen=True)
class Rule:
    """A conjunction of conditions with the outcome it produces."""

    name: str
    conditions: tuple[Condition, ...]
    consequence: Outcome

    def __post_init__(self):
        object.__setattr__(self, "conditions", tuple(self.conditions))
        if not self.conditions:
            raise ValueError(f"rule {self.name!r} must have at least one condition")

    def conditions_on(self, feature: FeatureId) -> tuple[Condition, ...]:
        return tuple(c for c in self.conditions if c.feature == feature)

    def holds(self, completed_values: np.ndarray) -> bool:
        return all(c.holds(completed_values[c.feature.index]) for c in self.conditions)


@dataclass(frozen=True)
class DecisionPolicy:
    """Ordered rules plus the outcome used when no rule fires."""

    rules: tuple[Rule, ...]
    default_outcome: Outcome

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        names = [r.name for r in self.rules]
        if len(set(names)) != len(names):
            raise ValueError("rule names must be unique within a policy")

    def rule_named(self, name: str) -> Rule | None:
        for rule in self.rules:
            if rule.name == name:
                return rule
        return None


# -- model backends ----------------------------------------------------------


@dataclass(frozen=True)
class LinearBackend:
    """y = coefficients . x + intercept over the model's own inputs."""

    coefficients: tuple[float, ...]
    intercept: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        object.__setattr__(self, "intercept", float(self.intercept))

    def predict(self, X: np.ndarray) -> np.ndarray:
        return X @ np.asarray(self.coefficients) + self.intercept


@dataclass(frozen=True)
class Stump:
    """One axis-aligned split contributing ``low`` below the threshold and
    ``high`` at or above it. ``position`` indexes the model's own inputs."""

    position: int
    threshold: float
    low: float
    high: float


@dataclass(frozen=True)
class StumpBackend:
    """Additive ensemble of decision stumps; a simple nonlinear backend."""

    stumps: tuple[Stump, ...]

    def __post_init__(self):
        object.__setattr__(self, "stumps", tuple(self.stumps))

    def predict(self, X: np.ndarray) -> np.ndarray:
        out = np.zeros(X.shape[0])
        for s in self.stumps:
            out += np.where(X[:, s.position] >= s.threshold, s.high, s.low)
        return out


@dataclass(frozen=True)
class ExternalBackend:
    """Delegates prediction to a subprocess via the JSON-lines protocol."""

    spec: ExternalModelSpec

    @cached_property
    def client(self) -> ExternalModelClient:
        return ExternalModelClient(self.spec)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.client.predict(np.asarray(X, dtype=float).tolist())


Backend = Union[LinearBackend, StumpBackend, ExternalBackend]


@dataclass(frozen=True)
class Model:
    """A predictor consuming an ordered subset of the input features."""

    name: str
    input_features: tuple[FeatureId, ...]
    backend: Backend

    def __post_init__(self):
        object.__setattr__(self, "input_features", tuple(self.input_features))

    @property
    def input_indices(self) -> list[int]:
        return [f.index for f in self.input_features]

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Predict on rows already restricted to this model's inputs."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != len(self.input_features):
            raise DimensionError(
                f"model {self.name!r} takes {len(self.input_features)} features, "
                f"got rows of length {X.shape[1]}"
            )
        y = np.asarray(self.backend.predict(X), dtype=float)
        if y.shape != (X.shape[0],):
            raise ModelEvaluationError(
                f"model {self.name!r} returned {y.shape} for {X.shape[0]} rows"
            )
        if not np.all(np.isfinite(y)):
            if isinstance(self.backend, ExternalBackend):
                raise ExternalModelError(f"model {self.name!r} produced a non-finite value")
            raise ModelEvaluationError(f"model {self.name!r} produced a non-finite value")
        return y

    def predict_full(self, X_full: np.ndarray) -> np.ndarray:
        """Predict on rows over all D input features; selects own columns."""
        X_full = np.atleast_2d(np.asarray(X_full, dtype=float))
        return self.predict(X_full[:, self.input_indices])


# -- instances ----------------------------------------------------------------


def _freeze(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != 1:
        raise DimensionError(f"expected a 1-D vector, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Instance:
    """A raw input vector of length D; all values finite."""

    values: np.ndarray

    def __post_init__(self):
        arr = _freeze(self.values)
        if not np.all(np.isfinite(arr)):
            raise ValueError("instance values must all be finite")
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class CompletedInstance:
    """An instance extended with every model output: length D+N."""

    values: np.ndarray
    n_inputs: int

    def __post_init__(self):
        arr = _freeze(self.values)
        if not 0 <= self.n_inputs <= len(arr):
            raise DimensionError("input count exceeds the completed vector length")
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def inputs(self) -> np.ndarray:
        return self.values[: self.n_inputs]


def as_instance(values) -> Instance:
    return values if isinstance(values, Instance) else Instance(values)


# -- the system ---------------------------------------------------------------


@dataclass(frozen=True)
class DecisionSystem:
    """Input features, models, and the decision policy, wired together."""

    input_features: tuple[FeatureId, ...]
    models: tuple[Model, ...]
    policy: DecisionPolicy

    def __post_init__(self):
        object.__setattr__(self, "input_features", tuple(self.input_features))
        object.__setattr__(self, "models", tuple(self.models))
        for i, f in enumerate(self.input_features):
            if f.kind is not FeatureKind.INPUT or f.index != i:
                raise ValueError(
                    f"input features must be INPUT-kind with indices 0..D-1; got {f}"
                )
        names = [f.name for f in self.input_features] + [m.name for m in self.models]
        if len(set(names)) != len(names):
            raise ValueError("feature and model names must be unique")

    @property
    def n_inputs(self) -> int:
        return len(self.input_features)

    @property
    def n_models(self) -> int:
        return len(self.models)

    @cached_property
    def internal_features(self) -> tuple[FeatureId, ...]:
        d = self.n_inputs
        return tuple(
            FeatureId(d + k, m.name, FeatureKind.INTERNAL) for k, m in enumerate(self.models)
        )

    @cached_property
    def all_features(self) -> tuple[FeatureId, ...]:
        return self.input_features + self.internal_features

    @cached_property
    def _by_name(self) -> dict[str, FeatureId]:
        return {f.name: f for f in self.all_features}

    def feature_named(self, name: str) -> FeatureId:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownFeature(f"unknown feature {name!r}") from None

    @property
    def input_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.input_features)

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.all_features)


def complete(system: DecisionSystem, instance) -> CompletedInstance:
    """Append each model's output to the instance, in system model order."""
    inst = as_instance(instance)
    if len(inst) != system.n_inputs:
        raise DimensionError(
            f"instance has {len(inst)} values, system expects {system.n_inputs}"
        )
    values = np.empty(system.n_inputs + system.n_models)
    values[: system.n_inputs] = inst.values
    for k, model in enumerate(system.models):
        values[system.n_inputs + k] = model.predict_full(inst.values[None, :])[0]
    return CompletedInstance(values, system.n_inputs)


def complete_batch(system: DecisionSystem, X: np.ndarray) -> np.ndarray:
    """Vectorized completion: (Q, D) raw rows to (Q, D+N)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != system.n_inputs:
        raise DimensionError(
            f"rows have {X.shape[1]} values, system expects {system.n_inputs}"
        )
    out = np.empty((X.shape[0], system.n_inputs + system.n_models))
    out[:, : system.n_inputs] = X
    for k, model in enumerate(system.models):
        out[:, system.n_inputs + k] = model.predict_full(X)
    return out


def evaluate_policy(
    policy: DecisionPolicy, completed: CompletedInstance
) -> tuple[Outcome, Rule | None]:
    """First rule (in order) whose conditions all hold wins; else the default."""
    values = completed.values
    for rule in policy.rules:
        for cond in rule.conditions:
            if cond.feature.index >= len(values):
                raise DimensionError(
                    f"condition on {cond.feature.name!r} is out of range for a "
                    f"completed vector of length {len(values)}"
                )
        if rule.holds(values):
            return rule.consequence, rule
    return policy.default_outcome, None


def _format_number(x: float) -> str:
    return repr(int(x)) if float(x).is_integer() and abs(x) < 1e16 else repr(float(x))
