"""Request loop and predictor wiring for the reference adapter.

Two ways to define the model:

* ``--linear c1,c2,... [--intercept B]`` evaluates a dot product inline;
* ``--predict package.module:function`` imports any callable that maps a
  list of feature values to one number.

``--features N`` pins the expected instance length (inferred from the
coefficient count for linear models). Per-request problems produce an
error response and the loop continues; only a setup failure exits
non-zero. EOF on stdin exits 0.
"""

from __future__ import annotations

import argparse
import importlib
import json
import math
import sys


class LinearPredictor:
    """Inline linear model: coefficients . values + intercept."""

    def __init__(self, coefficients: list[float], intercept: float = 0.0):
        self.coefficients = [float(c) for c in coefficients]
        self.intercept = float(intercept)

    def __call__(self, values: list[float]) -> float:
        return sum(c * v for c, v in zip(self.coefficients, values)) + self.intercept


def load_predictor(spec: str):
    """Import ``module.path:callable`` and return the callable."""
    module_name, _, attribute = spec.partition(":")
    if not module_name or not attribute:
        raise ValueError(f"predictor spec must look like module:function, got {spec!r}")
    module = importlib.import_module(module_name)
    predictor = getattr(module, attribute)
    if not callable(predictor):
        raise TypeError(f"{spec!r} is not callable")
    return predictor


def _encode(payload: dict) -> str:
    return json.dumps(payload, separators=(",", ":")) + "\n"


def _handle_line(line: str, predictor, n_features: int | None) -> str | None:
    line = line.strip()
    if not line:
        return None
    try:
        message = json.loads(line)
    except json.JSONDecodeError as exc:
        return _encode({"id": -1, "error": f"invalid JSON: {exc}"})
    request_id = message.get("id") if isinstance(message, dict) else None
    if not isinstance(request_id, int) or isinstance(request_id, bool):
        return _encode({"id": -1, "error": "request must carry an integer id"})
    instances = message.get("instances")
    if not isinstance(instances, list):
        return _encode({"id": request_id, "error": "request must carry an instances list"})

    predictions: list[float] = []
    for position, row in enumerate(instances):
        if not isinstance(row, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in row
        ):
            return _encode(
                {"id": request_id, "error": f"instance {position} is not a number list"}
            )
        if n_features is not None and len(row) != n_features:
            return _encode(
                {
                    "id": request_id,
                    "error": f"instance {position} has {len(row)} features, expected {n_features}",
                }
            )
        try:
            value = float(predictor([float(v) for v in row]))
        except Exception as exc:  # the model is user code; report, keep serving
            return _encode({"id": request_id, "error": f"prediction failed: {exc}"})
        if not math.isfinite(value):
            return _encode(
                {"id": request_id, "error": f"prediction for instance {position} is not finite"}
            )
        predictions.append(value)
    return _encode({"id": request_id, "predictions": predictions})


def serve(predictor, n_features: int | None = None, stdin=None, stdout=None) -> int:
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    for line in stdin:
        response = _handle_line(line, predictor, n_features)
        if response is not None:
            stdout.write(response)
            stdout.flush()
    return 0


def build_predictor(args) -> tuple:
    if (args.linear is None) == (args.predict is None):
        raise ValueError("exactly one of --linear or --predict is required")
    if args.linear is not None:
        coefficients = [float(part) for part in args.linear.split(",") if part.strip()]
        if not coefficients:
            raise ValueError("--linear needs at least one coefficient")
        n_features = args.features if args.features is not None else len(coefficients)
        if n_features != len(coefficients):
            raise ValueError(
                f"--features {n_features} disagrees with {len(coefficients)} coefficients"
            )
        return LinearPredictor(coefficients, args.intercept), n_features
    return load_predictor(args.predict), args.features


def entrypoint(argv=None) -> None:
    parser = argparse.ArgumentParser(
        prog="smace-model-adapter",
        description="Serve a prediction function over the smace JSON-lines protocol.",
    )
    parser.add_argument("--linear", help="comma-separated coefficients for an inline model")
    parser.add_argument("--intercept", type=float, default=0.0)
    parser.add_argument("--predict", help="module.path:function returning one number per row")
    parser.add_argument("--features", type=int, default=None,
                        help="expected instance length (inferred for --linear)")
    args = parser.parse_args(argv)
    try:
        predictor, n_features = build_predictor(args)
    except Exception as exc:
        print(f"setup failed: {exc}", file=sys.stderr)
        sys.exit(1)
    sys.exit(serve(predictor, n_features))


if __name__ == "__main__":
    entrypoint()
