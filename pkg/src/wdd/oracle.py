"""Run an external interestingness script on candidate inputs.

Script contract: the candidate is written to a fresh temporary directory
under the configured file name; the script runs with that directory as its
working directory and receives the candidate path both as ``argv[1]`` and
in ``REDUCE_CANDIDATE``. Exit status 0 means the property is preserved.
"""

from __future__ import annotations

import logging
import os
import shutil
import signal
import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Hashable, Sequence

from .core import OracleCache

__all__ = [
    "OracleConfig",
    "OracleError",
    "InitialTestFailed",
    "run_oracle",
    "verify_initial",
    "ScriptOracle",
    "DirectoryCache",
]

log = logging.getLogger(__name__)

CANDIDATE_ENV = "REDUCE_CANDIDATE"


class OracleError(RuntimeError):
    """The oracle could not be run at all (as opposed to answering "no")."""


class InitialTestFailed(RuntimeError):
    """The unreduced input does not have the property."""


@dataclass
class OracleConfig:
    script: Path
    filename: str = "candidate"
    timeout: float = 60.0
    cache_dir: Path | None = None
    env_passthrough: Sequence[str] | None = None
    keep_temps: bool = False
    # "reject": a timed-out candidate counts as not interesting; "abort": raise OracleError
    on_timeout: str = "reject"

    def validate(self) -> "OracleConfig":
        self.script = Path(self.script)
        if not self.timeout > 0:
            raise ValueError(f"timeout must be positive, got {self.timeout!r}")
        if self.on_timeout not in ("reject", "abort"):
            raise ValueError(f"on_timeout must be 'reject' or 'abort', got {self.on_timeout!r}")
        if not self.filename or os.sep in self.filename or self.filename in (".", ".."):
            raise ValueError(f"invalid candidate file name {self.filename!r}")
        if not self.script.is_file():
            raise OracleError(f"oracle script not found: {self.script}")
        if not os.access(self.script, os.X_OK):
            raise OracleError(f"oracle script is not executable: {self.script}")
        return self

    def environment(self, candidate_path: str) -> dict[str, str]:
        if self.env_passthrough is None:
            env = dict(os.environ)
        else:
            env = {k: os.environ[k] for k in self.env_passthrough if k in os.environ}
        env[CANDIDATE_ENV] = candidate_path
        return env


class _Timeout(Exception):
    pass


def _kill_group(proc: subprocess.Popen) -> None:
    try:
        os.killpg(proc.pid, signal.SIGKILL)
    except ProcessLookupError:
        pass
    proc.wait()


def _execute(candidate: bytes, config: OracleConfig) -> int:
    workdir = tempfile.mkdtemp(prefix="wdd-")
    try:
        path = os.path.join(workdir, config.filename)
        with open(path, "wb") as fh:
            fh.write(candidate)
        try:
            proc = subprocess.Popen(
                [str(Path(config.script).resolve()), path],
                cwd=workdir,
                env=config.environment(path),
                stdin=subprocess.DEVNULL,
                stdout=subprocess.DEVNULL,
                stderr=subprocess.DEVNULL,
                start_new_session=True,
            )
        except OSError as exc:
            raise OracleError(f"cannot start oracle {config.script}: {exc}") from exc
        try:
            return proc.wait(timeout=config.timeout)
        except subprocess.TimeoutExpired:
            _kill_group(proc)
            raise _Timeout from None
        except BaseException:
            _kill_group(proc)
            raise
        finally:
            # reap anything the script left behind in its session
            try:
                os.killpg(proc.pid, signal.SIGKILL)
            except (ProcessLookupError, PermissionError):
                pass
    except OSError as exc:
        raise OracleError(f"oracle sandbox failure: {exc}") from exc
    finally:
        if config.keep_temps:
            log.info("kept oracle directory %s", workdir)
        else:
            shutil.rmtree(workdir, ignore_errors=True)


def run_oracle(candidate: bytes, config: OracleConfig) -> bool:
    """Run the script once on ``candidate``; True iff it exits with status 0.

    A timeout yields False (with a warning) unless ``config.on_timeout`` is
    ``"abort"``. Failure to run the script raises :class:`OracleError`.
    """
    try:
        return _execute(candidate, config) == 0
    except _Timeout:
        if config.on_timeout == "abort":
            raise OracleError(f"oracle timed out after {config.timeout}s") from None
        log.warning("oracle timed out after %ss; treating candidate as not interesting", config.timeout)
        return False


def verify_initial(source: bytes, config: OracleConfig) -> None:
    """Raise :class:`InitialTestFailed` unless the unreduced input is interesting.

    A timeout here always aborts.
    """
    try:
        status = _execute(source, config)
    except _Timeout:
        raise InitialTestFailed(f"initial test timed out after {config.timeout}s") from None
    if status != 0:
        raise InitialTestFailed(f"initial test failed: oracle exited with status {status}")


class ScriptOracle:
    """Callable ``bytes -> bool`` wrapper around :func:`run_oracle` that counts runs."""

    def __init__(self, config: OracleConfig) -> None:
        self.config = config.validate()
        self.invocations = 0

    def __call__(self, candidate: bytes) -> bool:
        self.invocations += 1
        return run_oracle(candidate, self.config)


class DirectoryCache(OracleCache):
    """:class:`OracleCache` that also persists verdicts, one file per digest.

    Several sessions may share the directory; concurrent writers of the same
    key write the same verdict, so the last write winning is harmless.
    """

    def __init__(self, directory: str | os.PathLike) -> None:
        super().__init__()
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def _path(self, key: str) -> Path:
        return self.directory / key

    def get(self, key: Hashable) -> bool | None:
        verdict = super().get(key)
        if verdict is not None or not isinstance(key, str):
            return verdict
        try:
            data = self._path(key).read_bytes()
        except FileNotFoundError:
            return None
        if data not in (b"0", b"1"):
            return None
        verdict = data == b"1"
        super().put(key, verdict)
        return verdict

    def lookup(self, key: Hashable) -> bool | None:
        verdict = self.get(key)
        with self._lock:
            if verdict is None:
                self.misses += 1
            else:
                self.hits += 1
        return verdict

    def put(self, key: Hashable, verdict: bool) -> None:
        super().put(key, verdict)
        if not isinstance(key, str):
            return
        fd, tmp = tempfile.mkstemp(dir=self.directory, prefix=".tmp-")
        with os.fdopen(fd, "wb") as fh:
            fh.write(b"1" if verdict else b"0")
        os.replace(tmp, self._path(key))
