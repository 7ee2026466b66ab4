"""Client for external models speaking line-delimited JSON over stdio.

One request per line: ``{"id": <int>, "instances": [[f1, ..., fk], ...]}``.
One response per line, same id: ``{"id": <int>, "predictions": [y1, ...]}``
or ``{"id": <int>, "error": "<message>"}``. The subprocess is spawned once
and reused; requests to it are serialized; it is killed on timeout.
"""

from __future__ import annotations

import json
import math
import os
import select
import subprocess
import threading
import time
from dataclasses import dataclass

import numpy as np

from .errors import (
    ExternalModelError,
    ExternalTimeoutError,
    NonZeroExitError,
    ProtocolError,
)

DEFAULT_TIMEOUT_MS = 10_000


@dataclass(frozen=True)
class ExternalModelSpec:
    """How to start and talk to an external model process."""

    command: str
    args: tuple[str, ...] = ()
    timeout_ms: int = DEFAULT_TIMEOUT_MS

    def __post_init__(self):
        if not self.command:
            raise ValueError("external model command must be non-empty")
        object.__setattr__(self, "args", tuple(str(a) for a in self.args))


def encode_request(request_id: int, instances: list[list[float]]) -> bytes:
    payload = {"id": request_id, "instances": instances}
    return json.dumps(payload, separators=(",", ":")).encode("utf-8") + b"\n"


def encode_response(request_id: int, predictions: list[float]) -> bytes:
    payload = {"id": request_id, "predictions": predictions}
    return json.dumps(payload, separators=(",", ":")).encode("utf-8") + b"\n"


class ExternalModelClient:
    """Owns one adapter subprocess and exchanges prediction batches with it."""

    def __init__(self, spec: ExternalModelSpec):
        self.spec = spec
        self._proc: subprocess.Popen | None = None
        self._buffer = b""
        self._next_id = 1
        self._lock = threading.Lock()

    def predict(self, instances) -> np.ndarray:
        """Send one batch and return one finite prediction per instance."""
        rows = [[float(v) for v in row] for row in instances]
        with self._lock:
            self._ensure_running()
            request_id = self._next_id
            self._next_id += 1
            self._send(encode_request(request_id, rows))
            deadline = time.monotonic() + self.spec.timeout_ms / 1000.0
            line = self._read_line(deadline)
            return self._parse_response(line, request_id, expected=len(rows))

    def close(self) -> None:
        with self._lock:
            self._shutdown()

    def __del__(self):  # pragma: no cover - GC timing dependent
        try:
            self._shutdown()
        except Exception:
            pass

    # -- process management -------------------------------------------------

    def _ensure_running(self) -> None:
        if self._proc is not None and self._proc.poll() is None:
            return
        self._buffer = b""
        try:
            self._proc = subprocess.Popen(
                [self.spec.command, *self.spec.args],
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
            )
        except OSError as exc:
            raise ExternalModelError(f"cannot start external model: {exc}") from exc

    def _shutdown(self) -> None:
        proc, self._proc = self._proc, None
        self._buffer = b""
        if proc is None:
            return
        try:
            if proc.stdin:
                proc.stdin.close()
            proc.wait(timeout=0.5)
        except Exception:
            proc.kill()
            proc.wait()

    def _kill(self) -> None:
        if self._proc is not None:
            self._proc.kill()
            self._proc.wait()
            self._proc = None
        self._buffer = b""

    # -- wire handling -------------------------------------------------------

    def _send(self, data: bytes) -> None:
        assert self._proc is not None and self._proc.stdin is not None
        try:
            self._proc.stdin.write(data)
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError):
            code = self._proc.poll()
            self._kill()
            raise NonZeroExitError(f"external model closed its input (exit code {code})")

    def _read_line(self, deadline: float) -> bytes:
        """Read one LF-terminated line without ever blocking past the deadline."""
        assert self._proc is not None and self._proc.stdout is not None
        fd = self._proc.stdout.fileno()
        while b"\n" not in self._buffer:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                self._kill()
                raise ExternalTimeoutError(
                    f"external model did not answer within {self.spec.timeout_ms} ms"
                )
            ready, _, _ = select.select([fd], [], [], min(remaining, 0.05))
            if not ready:
                continue
            chunk = os.read(fd, 65536)
            if chunk == b"":
                code = self._proc.wait()
                self._proc = None
                if code != 0:
                    raise NonZeroExitError(f"external model exited with code {code}")
                raise ProtocolError("external model closed its output before responding")
            self._buffer += chunk
        line, self._buffer = self._buffer.split(b"\n", 1)
        return line

    @staticmethod
    def _parse_response(line: bytes, request_id: int, expected: int) -> np.ndarray:
        try:
            message = json.loads(line.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ProtocolError(f"malformed response line: {exc}") from exc
        if not isinstance(message, dict):
            raise ProtocolError("response is not a JSON object")
        if message.get("id") != request_id:
            raise ProtocolError(
                f"response id {message.get('id')!r} does not match request id {request_id}"
            )
        if "error" in message:
            raise ExternalModelError(f"external model error: {message['error']}")
        predictions = message.get("predictions")
        if not isinstance(predictions, list):
            raise ProtocolError("response is missing a 'predictions' list")
        if len(predictions) != expected:
            raise ProtocolError(
                f"got {len(predictions)} predictions for {expected} instances"
            )
        values = []
        for y in predictions:
            if not isinstance(y, (int, float)) or isinstance(y, bool) or not math.isfinite(y):
                raise ProtocolError(f"non-finite or non-numeric prediction: {y!r}")
            values.append(float(y))
        return np.asarray(values, dtype=float)


def external_predict(spec: ExternalModelSpec, batch) -> list[float]:
    """One-shot convenience wrapper; real callers keep a client per model."""
    client = ExternalModelClient(spec)
    try:
        return [float(y) for y in client.predict(batch)]
    finally:
        client.close()
