"""Subject-program execution with resource limits and the equivalence oracle.

Programs run as subprocesses of a configured interpreter command inside a
fresh temporary directory, in their own process group (killed wholesale on
timeout), with stdout/stderr spooled to disk so a runaway writer cannot
exhaust memory. Equivalence is judged against a problem's expected outputs
under competitive-judge normalization: trailing whitespace per line and
trailing blank lines are ignored, everything else is compared byte-for-byte.
"""

from __future__ import annotations

import os
import signal
import subprocess
import tempfile
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .errors import SandboxEnvironmentError

try:
    import resource as _resource
except ImportError:  # non-POSIX: memory caps become best-effort no-ops
    _resource = None  # type: ignore[assignment]

_MIB = 1024 * 1024

# Statuses a finished execution can land in, in classification precedence.
STATUS_OK = "ok"
STATUS_NONZERO = "nonzero_exit"
STATUS_TIMEOUT = "timeout"
STATUS_TRUNCATED = "output_truncated"
STATUS_SPAWN_FAILURE = "spawn_failure"

OUTCOME_MATCH = "match"
OUTCOME_MISMATCH = "mismatch"
OUTCOME_RUNTIME_ERROR = "runtime_error"
OUTCOME_TIMEOUT = "timeout"


@dataclass(frozen=True)
class ExecLimits:
    """Resource envelope for one subject execution."""

    wall_time_ms: int = 2000
    memory_bytes: int = 256 * _MIB
    max_output_bytes: int = 8 * _MIB

    def __post_init__(self) -> None:
        for name in ("wall_time_ms", "memory_bytes", "max_output_bytes"):
            if getattr(self, name) <= 0:
                raise ValueError(f"ExecLimits.{name} must be positive")


@dataclass
class ExecResult:
    status: str
    stdout: bytes
    stderr: bytes
    wall_time_ms: float
    exit_code: int | None = None


@dataclass(frozen=True)
class PerTestOutcome:
    test_index: int
    outcome: str


@dataclass
class EquivalenceVerdict:
    equivalent: int  # 1 iff every per-test outcome is a match
    per_test: list[PerTestOutcome] = field(default_factory=list)


@dataclass(frozen=True)
class SandboxConfig:
    """Interpreter/validity commands plus default limits.

    ``interpreter_cmd`` and ``validity_cmd`` are argv templates; the literal
    element ``{file}`` is replaced by the path of a file holding the program
    source. ``max_workers`` caps simultaneous subject processes globally.
    """

    interpreter_cmd: tuple[str, ...]
    validity_cmd: tuple[str, ...]
    limits: ExecLimits = ExecLimits()
    max_workers: int = 0  # 0 = logical CPU count
    source_filename: str = "prog.py"

    def worker_cap(self) -> int:
        return self.max_workers if self.max_workers > 0 else (os.cpu_count() or 1)


# One process-wide gate over subject subprocesses, sized from the first config
# that runs something. Resizing requires a new interpreter process.
_slots_lock = threading.Lock()
_slots: threading.BoundedSemaphore | None = None


def _acquire_slot(cfg: SandboxConfig) -> threading.BoundedSemaphore:
    global _slots
    with _slots_lock:
        if _slots is None:
            _slots = threading.BoundedSemaphore(cfg.worker_cap())
        return _slots


def _render_argv(template: Sequence[str], file_path: Path) -> list[str]:
    return [part.replace("{file}", str(file_path)) for part in template]


def run_process(
    argv: Sequence[str],
    stdin_bytes: bytes,
    wall_time_ms: int,
    max_output_bytes: int,
    memory_bytes: int | None = None,
    cwd: str | None = None,
    env: dict[str, str] | None = None,
) -> ExecResult:
    """Run one subprocess under limits; no interpretation of the command.

    The child gets its own session (process group) so a timeout kill reaps
    grandchildren too. stdout/stderr go to spool files in ``cwd`` and are read
    back capped at ``max_output_bytes``.
    """
    workdir = Path(cwd) if cwd is not None else Path(tempfile.mkdtemp(prefix="spt-proc-"))
    out_path = workdir / ".stdout.spool"
    err_path = workdir / ".stderr.spool"
    start = time.monotonic()
    try:
        with open(out_path, "wb") as out_f, open(err_path, "wb") as err_f:
            try:
                proc = subprocess.Popen(
                    list(argv),
                    stdin=subprocess.PIPE,
                    stdout=out_f,
                    stderr=err_f,
                    cwd=str(workdir),
                    env=env,
                    start_new_session=True,
                )
            except (OSError, ValueError) as exc:
                return ExecResult(
                    status=STATUS_SPAWN_FAILURE,
                    stdout=b"",
                    stderr=f"spawn failed: {exc}".encode(),
                    wall_time_ms=(time.monotonic() - start) * 1000.0,
                )
            if memory_bytes is not None and _resource is not None and hasattr(_resource, "prlimit"):
                try:
                    _resource.prlimit(proc.pid, _resource.RLIMIT_AS, (memory_bytes, memory_bytes))
                except (OSError, ValueError):
                    pass  # child may already be gone; limit is best-effort
            timed_out = False
            try:
                proc.communicate(input=stdin_bytes, timeout=wall_time_ms / 1000.0)
            except subprocess.TimeoutExpired:
                timed_out = True
                _kill_group(proc)
                try:
                    proc.communicate(timeout=5)
                except (subprocess.TimeoutExpired, ValueError, OSError):
                    pass
        wall_ms = (time.monotonic() - start) * 1000.0
        stdout, out_over = _read_capped(out_path, max_output_bytes)
        stderr, _ = _read_capped(err_path, max_output_bytes)
        if timed_out:
            status: str = STATUS_TIMEOUT
        elif out_over:
            status = STATUS_TRUNCATED
        elif proc.returncode != 0:
            status = STATUS_NONZERO
        else:
            status = STATUS_OK
        return ExecResult(
            status=status,
            stdout=stdout,
            stderr=stderr,
            wall_time_ms=wall_ms,
            exit_code=proc.returncode if not timed_out else None,
        )
    finally:
        for p in (out_path, err_path):
            try:
                p.unlink()
            except OSError:
                pass


def _kill_group(proc: subprocess.Popen) -> None:
    try:
        os.killpg(proc.pid, signal.SIGKILL)
    except (ProcessLookupError, PermissionError, OSError):
        try:
            proc.kill()
        except OSError:
            pass


def _read_capped(path: Path, cap: int) -> tuple[bytes, bool]:
    try:
        with open(path, "rb") as f:
            data = f.read(cap + 1)
    except OSError:
        return b"", False
    if len(data) > cap:
        return data[:cap], True
    return data, False


def run_subject(
    source: str,
    stdin: bytes,
    limits: ExecLimits,
    cfg: SandboxConfig,
) -> ExecResult:
    """Execute one subject program on one input under the configured interpreter.

    Each call gets a private working directory (removed afterwards), so
    concurrent executions never share files.
    """
    slots = _acquire_slot(cfg)
    with slots:
        with tempfile.TemporaryDirectory(prefix="spt-run-") as td:
            prog = Path(td) / cfg.source_filename
            prog.write_text(source, encoding="utf-8")
            argv = _render_argv(cfg.interpreter_cmd, prog)
            return run_process(
                argv,
                stdin,
                wall_time_ms=limits.wall_time_ms,
                max_output_bytes=limits.max_output_bytes,
                memory_bytes=limits.memory_bytes,
                cwd=td,
            )


def check_valid(source: str, cfg: SandboxConfig) -> bool:
    """True iff the configured validity command exits 0 on the source."""
    with tempfile.TemporaryDirectory(prefix="spt-valid-") as td:
        prog = Path(td) / cfg.source_filename
        prog.write_text(source, encoding="utf-8")
        argv = _render_argv(cfg.validity_cmd, prog)
        try:
            proc = subprocess.run(
                argv,
                stdout=subprocess.DEVNULL,
                stderr=subprocess.DEVNULL,
                cwd=td,
                timeout=max(cfg.limits.wall_time_ms, 10_000) / 1000.0,
            )
        except FileNotFoundError as exc:
            raise SandboxEnvironmentError(f"validity command missing: {exc}") from exc
        except subprocess.TimeoutExpired:
            return False
        return proc.returncode == 0


def normalize_output(data: bytes) -> bytes:
    """Judge normalization: strip trailing whitespace per line, drop trailing
    empty lines, keep everything else byte-for-byte."""
    lines = [line.rstrip() for line in data.split(b"\n")]
    while lines and lines[-1] == b"":
        lines.pop()
    return b"\n".join(lines)


def check_equivalent(
    candidate: str,
    tests: Sequence["UnitTestLike"],
    limits: ExecLimits,
    cfg: SandboxConfig,
    short_circuit: bool = True,
) -> EquivalenceVerdict:
    """Run the candidate on every test input and compare against expectations.

    A test's own time_limit_ms governs its run. Outcomes: ``match`` on
    normalized-equal stdout, ``mismatch`` on differing or truncated output,
    ``runtime_error`` on nonzero exit or spawn failure, ``timeout`` on wall
    overrun. ``equivalent`` is 1 iff every outcome recorded is a match;
    evaluation stops at the first non-match unless ``short_circuit`` is off.
    """
    per_test: list[PerTestOutcome] = []
    all_match = True
    for idx, test in enumerate(tests):
        test_limits = ExecLimits(
            wall_time_ms=test.time_limit_ms,
            memory_bytes=limits.memory_bytes,
            max_output_bytes=limits.max_output_bytes,
        )
        result = run_subject(candidate, test.stdin_text, test_limits, cfg)
        if result.status == STATUS_TIMEOUT:
            outcome = OUTCOME_TIMEOUT
        elif result.status in (STATUS_NONZERO, STATUS_SPAWN_FAILURE):
            outcome = OUTCOME_RUNTIME_ERROR
        elif result.status == STATUS_TRUNCATED:
            outcome = OUTCOME_MISMATCH
        elif normalize_output(result.stdout) == normalize_output(test.expected_stdout):
            outcome = OUTCOME_MATCH
        else:
            outcome = OUTCOME_MISMATCH
        per_test.append(PerTestOutcome(test_index=idx, outcome=outcome))
        if outcome != OUTCOME_MATCH:
            all_match = False
            if short_circuit:
                break
    return EquivalenceVerdict(equivalent=1 if all_match else 0, per_test=per_test)


class UnitTestLike:
    """Structural protocol for tests: stdin_text and expected_stdout bytes plus time_limit_ms."""

    stdin_text: bytes
    expected_stdout: bytes
    time_limit_ms: int
