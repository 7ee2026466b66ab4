"""Shared builders for the test suite."""

from __future__ import annotations

import itertools
import math

import numpy as np

from smace import (
    ComparisonOp,
    Condition,
    DecisionPolicy,
    DecisionSystem,
    FeatureId,
    FeatureKind,
    LinearBackend,
    Model,
    Rule,
    identity_scaler,
)
from smace.scaling import Dataset

OPS = (ComparisonOp.GE, ComparisonOp.LE, ComparisonOp.GT, ComparisonOp.LT)


def input_features(names):
    return tuple(FeatureId(i, n, FeatureKind.INPUT) for i, n in enumerate(names))


def rules_system(condition_specs, consequence=1, default=0, names=("x1", "x2", "x3")):
    """Build a one-rule system over named inputs from (name, op, threshold)."""
    features = input_features(names)
    by_name = {f.name: f for f in features}
    conditions = tuple(
        Condition(by_name[n], op, threshold) for n, op, threshold in condition_specs
    )
    policy = DecisionPolicy((Rule("R1", conditions, consequence),), default)
    return DecisionSystem(features, (), policy)


def unit_scaler(names):
    return identity_scaler(names)


def brute_force_shapley(predict, xi, background):
    """Independent oracle: interventional Shapley by explicit subset
    enumeration with itertools, kept separate from the library's path.

    predict maps an (m, n) array to m outputs; xi is the instance in the
    model's own feature space; background is an (q, n) array.
    """
    xi = np.asarray(xi, dtype=float)
    background = np.asarray(background, dtype=float)
    n = len(xi)
    players = list(range(n))

    def value(subset):
        mixed = background.copy()
        for j in subset:
            mixed[:, j] = xi[j]
        return float(np.mean(predict(mixed)))

    phi = np.zeros(n)
    for j in players:
        others = [p for p in players if p != j]
        for size in range(n):
            for subset in itertools.combinations(others, size):
                weight = (
                    math.factorial(len(subset))
                    * math.factorial(n - len(subset) - 1)
                    / math.factorial(n)
                )
                phi[j] += weight * (value(subset + (j,)) - value(subset))
    return phi, value(())


def random_linear_system(rng, max_inputs=4, max_models=3, max_conditions=3):
    """A random system with linear models and one random rule, for the
    randomized consistency and property suites."""
    d = int(rng.integers(1, max_inputs + 1))
    names = tuple(f"x{i + 1}" for i in range(d))
    features = input_features(names)
    n_models = int(rng.integers(0, max_models + 1))
    models = []
    for k in range(n_models):
        size = int(rng.integers(1, d + 1))
        picks = sorted(rng.choice(d, size=size, replace=False))
        coefficients = tuple(float(c) for c in rng.uniform(-5, 5, size=size))
        intercept = float(rng.uniform(-1, 1))
        models.append(
            Model(
                f"m{k + 1}",
                tuple(features[int(p)] for p in picks),
                LinearBackend(coefficients, intercept),
            )
        )
    system_features = features + tuple(
        FeatureId(d + k, m.name, FeatureKind.INTERNAL) for k, m in enumerate(models)
    )
    n_conditions = int(rng.integers(1, max_conditions + 1))
    conditions = []
    seen = set()
    while len(conditions) < n_conditions:
        f = system_features[int(rng.integers(0, len(system_features)))]
        op = OPS[int(rng.integers(0, len(OPS)))]
        threshold = float(np.round(rng.uniform(-2, 2), 3))
        if (f.name, op, threshold) in seen:
            continue
        seen.add((f.name, op, threshold))
        conditions.append(Condition(f, op, threshold))
    policy = DecisionPolicy((Rule("R1", tuple(conditions), 1),), 0)
    system = DecisionSystem(features, tuple(models), policy)
    dataset = Dataset(names, rng.uniform(-1, 2, size=(int(rng.integers(2, 30)), d)))
    return system, dataset
