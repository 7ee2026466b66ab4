"""Per-model additive attributions and their max-abs normalization.

The default engine computes exact interventional Shapley values by
enumerating all subsets of a model's inputs, with the value of a subset
defined as the mean prediction over a background dataset in which the
remaining features keep their background values. Attributions are then
divided by their largest absolute entry so that models reporting on very
different output scales become comparable (0/0 is defined as 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Instance, LinearBackend, Model, as_instance
from .errors import BackendMismatch, TooManyFeatures
from .scaling import Dataset

MAX_ENUMERATED_FEATURES = 15


@dataclass(frozen=True)
class ModelAttribution:
    """phi over all D input features (zero outside the model's inputs), in
    the raw units of the model's output, plus the background expectation."""

    model: str
    phi: np.ndarray
    base_value: float

    def __post_init__(self):
        phi = np.array(self.phi, dtype=float)
        phi.setflags(write=False)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "base_value", float(self.base_value))


@dataclass(frozen=True)
class NormalizedModelAttribution:
    """phi divided by max |phi|: dimensionless, every entry in [-1, 1]."""

    model: str
    phi_hat: np.ndarray

    def __post_init__(self):
        phi_hat = np.array(self.phi_hat, dtype=float)
        phi_hat.setflags(write=False)
        object.__setattr__(self, "phi_hat", phi_hat)


def normalize_attribution(attr: ModelAttribution) -> NormalizedModelAttribution:
    """phi_hat_j = phi_j / max_i |phi_i|, or the zero vector when all phi
    are zero. A single nonzero entry therefore maps to exactly +/-1."""
    peak = float(np.max(np.abs(attr.phi))) if len(attr.phi) else 0.0
    if peak == 0.0:
        return NormalizedModelAttribution(attr.model, np.zeros_like(attr.phi))
    return NormalizedModelAttribution(attr.model, attr.phi / peak)


def _own_columns(model: Model, instance: Instance, background: Dataset):
    xi = np.array([instance.values[f.index] for f in model.input_features])
    bg = np.column_stack([background.column(f.name) for f in model.input_features]) \
        if model.input_features else np.empty((background.n_rows, 0))
    return xi, bg


def shapley_exact(model: Model, instance, background: Dataset) -> ModelAttribution:
    """Exact interventional Shapley values by subset enumeration.

    v(S) is the mean prediction over background rows with the features in
    S pinned to the instance. Enumeration is capped at
    ``MAX_ENUMERATED_FEATURES`` inputs (2^15 subsets). Deterministic given
    the background; fixed summation order keeps results bit-stable.
    """
    instance = as_instance(instance)
    n = len(model.input_features)
    if n > MAX_ENUMERATED_FEATURES:
        raise TooManyFeatures(
            f"model {model.name!r} has {n} inputs; exact enumeration is capped at "
            f"{MAX_ENUMERATED_FEATURES} (consider a sampling engine)"
        )
    xi, bg = _own_columns(model, instance, background)

    values = np.empty(1 << n)
    for mask in range(1 << n):
        mixed = bg.copy()
        for j in range(n):
            if mask >> j & 1:
                mixed[:, j] = xi[j]
        values[mask] = float(np.mean(model.predict(mixed)))

    weights = [
        math.factorial(s) * math.factorial(n - s - 1) / math.factorial(n)
        for s in range(n)
    ]
    phi_own = np.zeros(n)
    for j in range(n):
        bit = 1 << j
        acc = 0.0
        for mask in range(1 << n):
            if mask & bit:
                continue
            acc += weights[bin(mask).count("1")] * (values[mask | bit] - values[mask])
        phi_own[j] = acc

    phi = np.zeros(len(instance))
    for j, f in enumerate(model.input_features):
        phi[f.index] = phi_own[j]
    return ModelAttribution(model.name, phi, float(values[0]))


def linear_attribution(model: Model, instance, background: Dataset) -> ModelAttribution:
    """Closed form for linear backends: phi_j = w_j (xi_j - mean_j). Agrees
    with :func:`shapley_exact` on every linear model."""
    if not isinstance(model.backend, LinearBackend):
        raise BackendMismatch(
            f"model {model.name!r} has backend {type(model.backend).__name__}; "
            "linear attribution requires a linear backend"
        )
    instance = as_instance(instance)
    xi, bg = _own_columns(model, instance, background)
    means = bg.mean(axis=0) if bg.size else np.zeros(0)
    w = np.asarray(model.backend.coefficients)
    phi = np.zeros(len(instance))
    for j, f in enumerate(model.input_features):
        phi[f.index] = w[j] * (xi[j] - means[j])
    base = float(w @ means + model.backend.intercept) if len(w) else model.backend.intercept
    return ModelAttribution(model.name, phi, base)


# -- attribution engines -------------------------------------------------------


class ExactShapleyEngine:
    """Default engine: exact Shapley against a (possibly subsampled)
    background. The subsample seed is recorded for the report."""

    name = "exact"

    def __init__(self, background: Dataset, seed: int = 0, max_background: int = 100):
        self.seed = seed
        self.background = background.subsample(max_background, seed)

    def attribute(self, model: Model, instance) -> ModelAttribution:
        return shapley_exact(model, instance, self.background)


class LinearAttributionEngine:
    """Closed-form engine for systems whose models are all linear."""

    name = "linear"

    def __init__(self, background: Dataset, seed: int = 0, max_background: int = 100):
        self.seed = seed
        self.background = background.subsample(max_background, seed)

    def attribute(self, model: Model, instance) -> ModelAttribution:
        return linear_attribution(model, instance, self.background)


ENGINES = {
    ExactShapleyEngine.name: ExactShapleyEngine,
    LinearAttributionEngine.name: LinearAttributionEngine,
}


def make_engine(kind: str, background: Dataset, seed: int = 0, max_background: int = 100):
    try:
        engine_cls = ENGINES[kind]
    except KeyError:
        raise ValueError(f"unknown attribution engine {kind!r}; choose from {sorted(ENGINES)}")
    return engine_cls(background, seed=seed, max_background=max_background)
