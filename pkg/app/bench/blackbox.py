"""
==========================
Bench - Black-Box Model
==========================

Adapter for models that can only be evaluated pointwise by an external program.

Line protocol over the child's standard input/output:
- request: d space-separated decimal reals and a newline (`%.17g`, so doubles round-trip);
- response: one decimal real and a newline, one response per request, in order.

The child is started once and kept alive across calls. Requests from worker threads are
serialised by a lock. A reader thread moves response lines into a queue so a request can give
up after `read_timeout` seconds; a child that times out is stopped together with everything it
spawned. Exit, malformed, late or non-finite responses raise `ModelError` carrying the point
and the raw response.

Usage:
>>> from app.bench.blackbox import BlackboxModel
>>> with BlackboxModel(["python", "my_model.py"], dimension=2) as model:
...     values = model(points)

*Author: Sudharshan TK*\n
*Created: 2025-09-07*
"""

from __future__ import annotations

import math
import queue
import subprocess
import threading
from typing import Optional, Sequence, TextIO

import numpy as np
import psutil

import app.helpers.config as cfg
from app.helpers.errors import ConfigError, ModelError
from app.logger import logger


def _pump_lines(stream: TextIO, lines: queue.Queue):
    """Forward every line of `stream` to `lines`; an empty string marks end of file."""
    try:
        for line in iter(stream.readline, ""):
            lines.put(line)
    except (OSError, ValueError):
        pass
    finally:
        lines.put("")


class BlackboxModel:
    """A `Model` backed by a long-lived child process speaking the line protocol."""

    def __init__(self, command: Sequence[str], dimension: int, terminate_timeout: float = 5.0,
                 read_timeout: Optional[float] = cfg.BLACKBOX_TIMEOUT):
        """
        Args:
            command (Sequence[str]): Program and arguments.
            dimension (int): Input dimension d.
            terminate_timeout (float, optional): Seconds to wait for the child on close. Defaults to 5.0.
            read_timeout (float, optional): Seconds to wait for each response; None waits forever.
                Defaults to `BLACKBOX_TIMEOUT` from the config.
        """
        if not command:
            raise ConfigError("blackbox command is empty")
        if dimension < 1:
            raise ConfigError(f"dimension must be >= 1, got {dimension}")
        if read_timeout is not None and read_timeout <= 0:
            raise ConfigError(f"read_timeout must be positive or None, got {read_timeout}")
        self.command = list(command)
        self.dimension = int(dimension)
        self.terminate_timeout = terminate_timeout
        self.read_timeout = read_timeout
        self._lock = threading.Lock()
        self._proc: Optional[subprocess.Popen] = None
        self._lines: Optional[queue.Queue] = None
        self._reader: Optional[threading.Thread] = None

    def _ensure_started(self) -> subprocess.Popen:
        if self._proc is None:
            try:
                self._proc = subprocess.Popen(
                    self.command, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                    text=True, bufsize=1, encoding="utf-8",
                )
            except OSError as e:
                raise ModelError(f"failed to start blackbox command {self.command}: {e}") from e
            self._lines = queue.Queue()
            self._reader = threading.Thread(target=_pump_lines, args=(self._proc.stdout, self._lines),
                                            name=f"BlackboxReader-{self._proc.pid}", daemon=True)
            self._reader.start()
            logger.info("Started blackbox model (pid %s): %s", self._proc.pid, " ".join(self.command))
        return self._proc

    def _request(self, proc: subprocess.Popen, point: np.ndarray) -> float:
        line = " ".join("%.17g" % v for v in point)
        try:
            proc.stdin.write(line + "\n")
            proc.stdin.flush()
        except (BrokenPipeError, OSError) as e:
            raise ModelError(f"blackbox process is gone: {e}", point=point) from e
        try:
            raw = self._lines.get(timeout=self.read_timeout)
        except queue.Empty:
            # a late answer would pair with the next request
            self._stop(*self._detach())
            raise ModelError(f"no blackbox response within {self.read_timeout:g}s", point=point) from None

        if raw == "":
            code = proc.poll()
            raise ModelError(f"blackbox process exited (status {code})", point=point, raw=raw)
        try:
            value = float(raw.strip())
        except ValueError:
            raise ModelError("malformed blackbox response", point=point, raw=raw) from None
        if not math.isfinite(value):
            raise ModelError("non-finite blackbox response", point=point, raw=raw)
        return value

    def __call__(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.dimension:
            raise ModelError(f"blackbox expects {self.dimension} coordinates, got {pts.shape[1]}")
        out = np.empty(pts.shape[0])
        with self._lock:
            proc = self._ensure_started()
            for j, point in enumerate(pts):
                try:
                    out[j] = self._request(proc, point)
                except ModelError as e:
                    logger.error("Blackbox protocol failure: %s", e)
                    raise
        return out

    def _detach(self) -> tuple[Optional[subprocess.Popen], Optional[threading.Thread]]:
        proc, reader = self._proc, self._reader
        self._proc, self._reader, self._lines = None, None, None
        return proc, reader

    def close(self):
        """
        Stop the child and everything it spawned. Best effort: failures are logged, not raised.
        """
        with self._lock:
            proc, reader = self._detach()
        self._stop(proc, reader)

    def _stop(self, proc: Optional[subprocess.Popen], reader: Optional[threading.Thread]):
        if proc is None:
            return
        try:
            if proc.stdin:
                proc.stdin.close()
        except Exception:
            pass
        try:
            children = psutil.Process(proc.pid).children(recursive=True)
        except psutil.Error:
            children = []
        try:
            proc.wait(timeout=self.terminate_timeout)
        except subprocess.TimeoutExpired:
            proc.terminate()
            try:
                proc.wait(timeout=self.terminate_timeout)
            except subprocess.TimeoutExpired:
                proc.kill()
                proc.wait()
        for child in children:
            try:
                child.terminate()
            except psutil.Error:
                pass
        _, alive = psutil.wait_procs(children, timeout=self.terminate_timeout)
        for child in alive:
            try:
                child.kill()
            except psutil.Error:
                logger.exception("Failed to kill blackbox child %s", child.pid)
        if reader is not None:
            reader.join(timeout=self.terminate_timeout)
        # a reader still blocked on the pipe holds the stream lock
        if proc.stdout and (reader is None or not reader.is_alive()):
            proc.stdout.close()
        logger.info("Stopped blackbox model (pid %s, status %s)", proc.pid, proc.returncode)

    def __enter__(self) -> BlackboxModel:
        return self

    def __exit__(self, *exc):
        self.close()


def blackbox_eval(command: Sequence[str], y) -> float:
    """
    One-shot evaluation of a black-box model at a single point.

    Returns:
        float: The model value.
    """
    point = np.asarray(y, dtype=float).reshape(-1)
    with BlackboxModel(command, point.size) as model:
        return float(model(point)[0])
