"""Reference adapter for the smace external-model protocol.

Wraps a prediction function behind line-delimited JSON on stdin/stdout:
one ``{"id": N, "instances": [[...], ...]}`` request per line, one
``{"id": N, "predictions": [...]}`` (or ``{"id": N, "error": "..."}``)
response per line. Stdlib only, so any model callable from Python can be
plugged into a system config without sharing a process or dependencies.
"""

from .serve import LinearPredictor, load_predictor, serve

__version__ = "0.1.0"
