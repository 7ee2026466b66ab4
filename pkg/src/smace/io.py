"""File ingestion: CSV datasets, JSON system configs, instance files.

The config document is strict: unknown keys are rejected, rule text is
parsed with the DSL, and the assembled system must pass validation. A
config looks like::

    {
      "features": [{"name": "x1"}, {"name": "x2"}, {"name": "x3"}],
      "models": [
        {"name": "m1", "inputs": ["x2", "x3"],
         "backend": {"type": "linear", "coefficients": [2, 1], "intercept": 0}},
        {"name": "m2", "inputs": ["x1", "x2", "x3"],
         "backend": {"type": "external", "command": "python3",
                     "args": ["-m", "smace_adapter", "--linear", "700,1000,-500"]}}
      ],
      "policy": {
        "rules": [{"name": "R3",
                   "dsl": "if x1 <= 0.5 and x2 >= 0.6 and m1 >= 1 and m2 <= 600 then 1"}],
        "default": 0
      },
      "dataset": {"path": "data.csv", "format": "csv"}
    }

Dataset paths are resolved relative to the config file's directory.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import (
    DecisionPolicy,
    DecisionSystem,
    ExternalBackend,
    FeatureId,
    FeatureKind,
    Instance,
    LinearBackend,
    Model,
    Outcome,
    Rule,
)
from .dsl import ParseDiagnostic, Severity, try_parse_rule, validate_system
from .errors import ConfigError, DatasetParseError, NonNumericCell
from .external import DEFAULT_TIMEOUT_MS, ExternalModelSpec
from .scaling import Dataset


def load_dataset(path, fmt: str = "csv") -> Dataset:
    """Read a CSV with a header row; every cell must be numeric."""
    if fmt != "csv":
        raise DatasetParseError(f"unsupported dataset format {fmt!r}")
    path = Path(path)
    with path.open(newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetParseError(f"dataset {path} is empty") from None
        header = [name.strip() for name in header]
        if not header or any(not name for name in header):
            raise DatasetParseError(f"dataset {path} has a malformed header row")
        rows = []
        for row_number, cells in enumerate(reader, start=2):
            if not cells:
                continue
            if len(cells) != len(header):
                raise DatasetParseError(
                    f"dataset {path}: expected {len(header)} cells", row=row_number
                )
            values = []
            for col_number, cell in enumerate(cells, start=1):
                try:
                    value = float(cell)
                except ValueError:
                    raise NonNumericCell(
                        f"dataset {path}: cell {cell!r} is not numeric",
                        row=row_number,
                        column=col_number,
                    ) from None
                if not math.isfinite(value):
                    raise NonNumericCell(
                        f"dataset {path}: cell {cell!r} is not finite",
                        row=row_number,
                        column=col_number,
                    )
                values.append(value)
            rows.append(values)
    if not rows:
        raise DatasetParseError(f"dataset {path} has a header but no rows (Q >= 1 violated)")
    return Dataset(tuple(header), np.asarray(rows))


def generate_uniform_dataset(columns, n_rows: int, seed: int) -> Dataset:
    """Rows uniform in [0, 1]^D drawn from PCG64(seed); used by the
    reproduction harness and documented so runs are replicable."""
    rng = np.random.Generator(np.random.PCG64(seed))
    return Dataset(tuple(columns), rng.random((n_rows, len(tuple(columns)))))


def save_dataset(dataset: Dataset, path) -> None:
    with Path(path).open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(dataset.columns)
        for row in dataset.rows:
            writer.writerow([repr(float(v)) for v in row])


# -- system config ---------------------------------------------------------------


@dataclass(frozen=True)
class LoadedSystem:
    system: DecisionSystem
    dataset: Dataset | None
    diagnostics: list[ParseDiagnostic]


def _require_keys(obj: dict, allowed: set[str], required: set[str], where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise ConfigError(f"{where}: missing keys {sorted(missing)}")


def _parse_outcome_literal(value, where: str) -> Outcome:
    if isinstance(value, bool) or not isinstance(value, (str, int, float)):
        raise ConfigError(f"{where}: outcome must be a string or number")
    return value


def _build_backend(obj: dict, n_inputs: int, where: str):
    _require_keys(
        obj,
        allowed={"type", "coefficients", "intercept", "command", "args"},
        required={"type"},
        where=where,
    )
    backend_type = obj["type"]
    if backend_type == "linear":
        if "command" in obj or "args" in obj:
            raise ConfigError(f"{where}: linear backends take no command/args")
        if "coefficients" not in obj:
            raise ConfigError(f"{where}: linear backends require coefficients")
        coefficients = obj["coefficients"]
        if not isinstance(coefficients, list) or not all(
            isinstance(c, (int, float)) and not isinstance(c, bool) for c in coefficients
        ):
            raise ConfigError(f"{where}: coefficients must be a list of numbers")
        if len(coefficients) != n_inputs:
            raise ConfigError(
                f"{where}: {len(coefficients)} coefficients for {n_inputs} inputs"
            )
        intercept = obj.get("intercept", 0.0)
        if isinstance(intercept, bool) or not isinstance(intercept, (int, float)):
            raise ConfigError(f"{where}: intercept must be a number")
        return LinearBackend(tuple(float(c) for c in coefficients), float(intercept))
    if backend_type == "external":
        if "coefficients" in obj or "intercept" in obj:
            raise ConfigError(f"{where}: external backends take no coefficients/intercept")
        command = obj.get("command")
        if not isinstance(command, str) or not command:
            raise ConfigError(f"{where}: external backends require a command string")
        args = obj.get("args", [])
        if not isinstance(args, list) or not all(isinstance(a, str) for a in args):
            raise ConfigError(f"{where}: args must be a list of strings")
        return ExternalBackend(
            ExternalModelSpec(command, tuple(args), timeout_ms=DEFAULT_TIMEOUT_MS)
        )
    raise ConfigError(f"{where}: unknown backend type {backend_type!r}")


def load_system(path, strict: bool = True) -> LoadedSystem:
    """Parse a config document into a system plus its reference dataset.

    With ``strict`` (the default) any Error diagnostic raises ConfigError;
    otherwise the partially built system is returned with the diagnostics
    so callers like ``validate`` can report them all.
    """
    path = Path(path)
    try:
        document = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read system config {path}: {exc}") from exc
    if not isinstance(document, dict):
        raise ConfigError(f"system config {path} must be a JSON object")
    _require_keys(
        document,
        allowed={"features", "models", "policy", "dataset"},
        required={"features", "policy"},
        where="config",
    )

    features_spec = document["features"]
    if not isinstance(features_spec, list) or not features_spec:
        raise ConfigError("config.features must be a non-empty list")
    input_features = []
    for i, item in enumerate(features_spec):
        where = f"config.features[{i}]"
        if not isinstance(item, dict):
            raise ConfigError(f"{where}: expected an object with a name")
        _require_keys(item, allowed={"name"}, required={"name"}, where=where)
        if not isinstance(item["name"], str) or not item["name"]:
            raise ConfigError(f"{where}: name must be a non-empty string")
        input_features.append(FeatureId(i, item["name"], FeatureKind.INPUT))
    names = {f.name: f for f in input_features}
    if len(names) != len(input_features):
        raise ConfigError("config.features: feature names must be unique")

    models = []
    d = len(input_features)
    for k, item in enumerate(document.get("models", [])):
        where = f"config.models[{k}]"
        if not isinstance(item, dict):
            raise ConfigError(f"{where}: expected an object")
        _require_keys(
            item, allowed={"name", "inputs", "backend"}, required={"name", "inputs", "backend"},
            where=where,
        )
        if not isinstance(item["name"], str) or not item["name"]:
            raise ConfigError(f"{where}: name must be a non-empty string")
        inputs = item["inputs"]
        if not isinstance(inputs, list) or not all(isinstance(n, str) for n in inputs):
            raise ConfigError(f"{where}: inputs must be a list of feature names")
        resolved = []
        for input_name in inputs:
            if input_name not in names:
                raise ConfigError(f"{where}: unknown input feature {input_name!r}")
            resolved.append(names[input_name])
        backend = _build_backend(item["backend"], len(resolved), f"{where}.backend")
        models.append(Model(item["name"], tuple(resolved), backend))
    # internal features become visible to rule text under the model's name
    feature_map = dict(names)
    for k, model in enumerate(models):
        if model.name in feature_map:
            raise ConfigError(f"config.models: name {model.name!r} collides with a feature")
        feature_map[model.name] = FeatureId(d + k, model.name, FeatureKind.INTERNAL)

    policy_spec = document["policy"]
    if not isinstance(policy_spec, dict):
        raise ConfigError("config.policy must be an object")
    _require_keys(policy_spec, allowed={"rules", "default"}, required={"rules", "default"},
                  where="config.policy")
    default_outcome = _parse_outcome_literal(policy_spec["default"], "config.policy.default")
    rules_spec = policy_spec["rules"]
    if not isinstance(rules_spec, list):
        raise ConfigError("config.policy.rules must be a list")

    diagnostics: list[ParseDiagnostic] = []
    rules: list[Rule] = []
    for i, item in enumerate(rules_spec):
        where = f"config.policy.rules[{i}]"
        if not isinstance(item, dict):
            raise ConfigError(f"{where}: expected an object")
        _require_keys(item, allowed={"name", "dsl"}, required={"name", "dsl"}, where=where)
        if not isinstance(item["name"], str) or not isinstance(item["dsl"], str):
            raise ConfigError(f"{where}: name and dsl must be strings")
        parsed, errors = try_parse_rule(item["dsl"], feature_map, name=item["name"])
        if errors:
            diagnostics.extend(
                ParseDiagnostic(e.position, f"rule {item['name']!r}: {e.message}", e.severity)
                for e in errors
            )
            continue
        assert parsed is not None
        rules.append(parsed.rule)
        if parsed.default_outcome is not None:
            default_outcome = parsed.default_outcome

    system = DecisionSystem(
        tuple(input_features), tuple(models), DecisionPolicy(tuple(rules), default_outcome)
    )
    diagnostics.extend(validate_system(system))

    dataset = None
    if "dataset" in document:
        spec = document["dataset"]
        if not isinstance(spec, dict):
            raise ConfigError("config.dataset must be an object")
        _require_keys(spec, allowed={"path", "format"}, required={"path"}, where="config.dataset")
        dataset = load_dataset(path.parent / spec["path"], spec.get("format", "csv"))
        if dataset.columns != system.input_names:
            diagnostics.append(
                ParseDiagnostic(
                    (0, 0),
                    f"dataset columns {dataset.columns} do not match the declared "
                    f"features {system.input_names}",
                    Severity.ERROR,
                )
            )

    if strict:
        errors = [d for d in diagnostics if d.severity is Severity.ERROR]
        if errors:
            raise ConfigError(
                "invalid system config:\n" + "\n".join(f"  {d}" for d in errors)
            )
    return LoadedSystem(system, dataset, diagnostics)


def load_instance(path, system: DecisionSystem) -> Instance:
    """Read an instance file: a JSON array in feature order, or an object
    mapping every input feature name to a value."""
    path = Path(path)
    try:
        document = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read instance {path}: {exc}") from exc
    if (
        isinstance(document, dict)
        and set(document) == {"values"}
        and isinstance(document["values"], list)
        and "values" not in system.input_names
    ):
        document = document["values"]
    if isinstance(document, list):
        values = document
    elif isinstance(document, dict):
        missing = set(system.input_names) - set(document)
        extra = set(document) - set(system.input_names)
        if missing or extra:
            raise ConfigError(
                f"instance {path}: expected exactly the input features "
                f"{list(system.input_names)}"
            )
        values = [document[name] for name in system.input_names]
    else:
        raise ConfigError(f"instance {path} must be a JSON array or object")
    if len(values) != system.n_inputs:
        raise ConfigError(
            f"instance {path} has {len(values)} values, system expects {system.n_inputs}"
        )
    if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in values):
        raise ConfigError(f"instance {path} must contain numbers only")
    return Instance(np.asarray(values, dtype=float))
