"""Min-max scaling over input and internal features.

Bounds come from a reference dataset: input bounds are column extrema,
internal bounds are the extrema of each model queried over the dataset.
Scaled values are clamped to [0, 1] so that instances outside the
reference range still produce bounded contributions; a feature with
min == max scales to 0 and is reported as a warning.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DecisionSystem, FeatureId
from .errors import DatasetParseError, DimensionError, UnscaledFeature


@dataclass(frozen=True)
class Dataset:
    """A rectangular table of finite reals, one column per input feature."""

    columns: tuple[str, ...]
    rows: np.ndarray  # shape (Q, D)

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        rows = np.array(self.rows, dtype=float)
        if rows.ndim != 2:
            raise DatasetParseError(f"dataset rows must be 2-D, got shape {rows.shape}")
        if rows.shape[0] < 1:
            raise DatasetParseError("dataset must contain at least one row (Q >= 1)")
        if rows.shape[1] != len(self.columns):
            raise DatasetParseError(
                f"{len(self.columns)} columns declared but rows have {rows.shape[1]} cells"
            )
        if not np.all(np.isfinite(rows)):
            raise DatasetParseError("dataset cells must all be finite")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @property
    def n_rows(self) -> int:
        return self.rows.shape[0]

    def column(self, name: str) -> np.ndarray:
        try:
            return self.rows[:, self.columns.index(name)]
        except ValueError:
            raise UnscaledFeature(f"dataset has no column {name!r}") from None

    def subsample(self, size: int, seed: int) -> "Dataset":
        """Deterministic row subsample without replacement."""
        if size >= self.n_rows:
            return self
        rng = np.random.Generator(np.random.PCG64(seed))
        keep = rng.choice(self.n_rows, size=size, replace=False)
        return Dataset(self.columns, self.rows[keep])


@dataclass(frozen=True)
class Scaler:
    """Per-feature (min, max) in raw units, covering inputs and internals."""

    bounds: dict[str, tuple[float, float]]
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        clean = {}
        for name, (lo, hi) in self.bounds.items():
            lo, hi = float(lo), float(hi)
            if not (np.isfinite(lo) and np.isfinite(hi)) or lo > hi:
                raise ValueError(f"invalid bounds for {name!r}: ({lo}, {hi})")
            clean[name] = (lo, hi)
        object.__setattr__(self, "bounds", clean)
        object.__setattr__(self, "warnings", tuple(self.warnings))

    @classmethod
    def from_bounds(cls, bounds: dict[str, tuple[float, float]]) -> "Scaler":
        return cls(dict(bounds))

    def bounds_for(self, feature: FeatureId | str) -> tuple[float, float]:
        name = feature.name if isinstance(feature, FeatureId) else feature
        try:
            return self.bounds[name]
        except KeyError:
            raise UnscaledFeature(f"no scaling bounds fitted for feature {name!r}") from None

    def scale(self, feature: FeatureId | str, value: float) -> float:
        """(value - min) / (max - min), clamped to [0, 1]; 0 when min == max."""
        lo, hi = self.bounds_for(feature)
        if hi == lo:
            return 0.0
        return min(1.0, max(0.0, (float(value) - lo) / (hi - lo)))

    def unscale(self, feature: FeatureId | str, scaled: float) -> float:
        """Linear inverse of :meth:`scale`; intentionally not clamped."""
        lo, hi = self.bounds_for(feature)
        return lo + float(scaled) * (hi - lo)


def scale(scaler: Scaler, feature: FeatureId | str, value: float) -> float:
    return scaler.scale(feature, value)


def fit_scaler(system: DecisionSystem, dataset: Dataset) -> Scaler:
    """Column extrema for inputs; model-output extrema over the dataset for
    internal features. Deterministic given its inputs."""
    if dataset.columns != system.input_names:
        raise DimensionError(
            f"dataset columns {dataset.columns} do not match the system's "
            f"input features {system.input_names}"
        )
    bounds: dict[str, tuple[float, float]] = {}
    warnings: list[str] = []
    for j, name in enumerate(system.input_names):
        col = dataset.rows[:, j]
        bounds[name] = (float(col.min()), float(col.max()))
    for model in system.models:
        outputs = model.predict_full(dataset.rows)
        bounds[model.name] = (float(outputs.min()), float(outputs.max()))
    for name, (lo, hi) in bounds.items():
        if lo == hi:
            warnings.append(
                f"feature {name!r} is constant over the reference data; "
                "its scaled value is defined as 0 and boundary distance is meaningless"
            )
    return Scaler(bounds, tuple(warnings))


def identity_scaler(names) -> Scaler:
    """Unit [0, 1] bounds for every named feature; handy for scaled data."""
    return Scaler({name: (0.0, 1.0) for name in names})
