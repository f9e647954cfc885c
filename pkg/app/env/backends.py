"""Measurement backends: the analytic simulator and a real C compiler."""

import logging
import re
import shutil
import subprocess
import tempfile
import time
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.config import CC_BASE_TIMEOUT, CC_FLAGS, CC_PATH, LOGGER_NAME
from app.env.constants import BACKEND_CLANG, BACKEND_SIM, DEFAULT_RUNS, DEFAULT_WARMUPS
from app.env.simulator import sim_baseline_compile_time, sim_baseline_cost, sim_compile_time, sim_cost
from app.env.views import BackendResult, CompileStatus, EnvConfig, SimLoopFeatures
from app.errors import (
    BackendUnavailableError,
    CompileError,
    CompilerNotFoundError,
    RunTimeoutError,
)
from app.loop_ir.features import sim_features
from app.loop_ir.views import LoopNest
from app.memo import BoundedMemo

logger = logging.getLogger(LOGGER_NAME)

_SECONDS_RE = re.compile(r"([0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?)\s*$")


class Backend(ABC):
    name: str = ""
    deterministic: bool = False

    @abstractmethod
    def measure(
        self,
        nest: LoopNest,
        source: str,
        vf: Optional[int] = None,
        if_: Optional[int] = None,
        compile_timeout: Optional[float] = None,
        run_timeout: Optional[float] = None,
    ) -> BackendResult:
        """
        Compile and time source. vf/if_ of None means the unmodified baseline;
        otherwise source already carries the pragma for (vf, if_).
        """

    def describe(self) -> Dict[str, object]:
        return {"name": self.name, "deterministic": self.deterministic}


class SimBackend(Backend):
    name = BACKEND_SIM
    deterministic = True

    def __init__(self, compile_model: bool = True):
        self.compile_model = compile_model
        self._features: BoundedMemo[Tuple[str, str], SimLoopFeatures] = BoundedMemo()

    def features(self, nest: LoopNest) -> SimLoopFeatures:
        return self._features.get_or_compute((nest.source_digest, nest.nest_id), lambda: sim_features(nest))

    def measure(self, nest, source, vf=None, if_=None, compile_timeout=None, run_timeout=None) -> BackendResult:
        f = self.features(nest)
        if vf is None or if_ is None:
            exec_time = sim_baseline_cost(f)
            compile_time = sim_baseline_compile_time(f) if self.compile_model else 0.0
        else:
            exec_time = sim_cost(f, vf, if_)
            compile_time = sim_compile_time(f, vf, if_) if self.compile_model else 0.0
        if compile_timeout is not None and compile_time > compile_timeout:
            return BackendResult(status=CompileStatus.TIMEOUT, compile_time=compile_time)
        if run_timeout is not None and exec_time > run_timeout:
            return BackendResult(status=CompileStatus.TIMEOUT, compile_time=compile_time)
        return BackendResult(status=CompileStatus.OK, compile_time=compile_time, exec_time=exec_time)


def find_compiler(compiler: str = CC_PATH) -> str:
    path = shutil.which(compiler)
    if path is None:
        raise CompilerNotFoundError(detail=f"C compiler {compiler!r} not found", context={"compiler": compiler})
    return path


def run_subprocess(cmd: List[str], timeout: Optional[float] = None, cwd: Optional[Path] = None) -> Tuple[int, str, str]:
    """Run cmd; the return code is None when the timeout expired."""
    proc = subprocess.Popen(
        cmd, cwd=str(cwd) if cwd else None, stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True
    )
    try:
        out, err = proc.communicate(timeout=timeout)
        return proc.returncode, out, err
    except subprocess.TimeoutExpired:
        proc.kill()
        out, err = proc.communicate()
        return None, out, err


def _reported_seconds(stdout: str) -> Optional[float]:
    lines = [line for line in stdout.strip().splitlines() if line.strip()]
    if not lines:
        return None
    match = _SECONDS_RE.search(lines[-1])
    if match is None:
        return None
    value = float(match.group(1))
    return value if value > 0 else None


def clang_backend_measure(
    source_path: Path,
    compile_flags: Sequence[str] = tuple(CC_FLAGS),
    runs: int = DEFAULT_RUNS,
    warmups: int = DEFAULT_WARMUPS,
    timeout: Optional[float] = CC_BASE_TIMEOUT,
    run_timeout: Optional[float] = None,
    compiler: str = CC_PATH,
) -> Tuple[float, float]:
    """
    Compile source_path and time the resulting harness.

    The harness prints its kernel time in seconds as the last number on stdout;
    when it does not, the process wall-clock time is used. The median over
    `runs` timed executions after `warmups` discarded ones is reported.

    Returns:
        (compile_time, exec_time) in seconds

    Raises:
        CompilerNotFoundError, CompileError, RunTimeoutError
    """
    cc = find_compiler(compiler)
    source_path = Path(source_path)
    with tempfile.TemporaryDirectory() as tmp:
        exe = Path(tmp) / source_path.with_suffix(".bin").name
        compile_time = _compile(cc, compile_flags, source_path, exe, timeout)
        times = _time_runs(exe, runs, warmups, run_timeout)
    return compile_time, float(np.median(times))


def _compile(cc: str, compile_flags: Sequence[str], source_path: Path, exe: Path, timeout: Optional[float]) -> float:
    start = time.perf_counter()
    code, _, err = run_subprocess([cc, *compile_flags, str(source_path), "-o", str(exe)], timeout=timeout)
    compile_time = time.perf_counter() - start
    if code is None:
        raise RunTimeoutError(
            detail=f"Compilation exceeded {timeout:.3f}s",
            context={"phase": "compile", "elapsed": compile_time},
        )
    if code != 0:
        raise CompileError(err)
    return compile_time


def _time_runs(exe: Path, runs: int, warmups: int, run_timeout: Optional[float]) -> List[float]:
    times: List[float] = []
    for i in range(warmups + runs):
        start = time.perf_counter()
        code, out, err = run_subprocess([str(exe)], timeout=run_timeout)
        elapsed = time.perf_counter() - start
        if code is None:
            raise RunTimeoutError(
                detail=f"Execution exceeded {run_timeout:.3f}s",
                context={"phase": "run", "elapsed": elapsed},
            )
        if code != 0:
            raise CompileError(f"program exited with status {code}: {err}")
        if i >= warmups:
            times.append(_reported_seconds(out) or elapsed)
    return times


class ClangBackend(Backend):
    name = BACKEND_CLANG
    deterministic = False

    def __init__(
        self,
        compiler: str = CC_PATH,
        flags: Optional[Sequence[str]] = None,
        runs: int = DEFAULT_RUNS,
        warmups: int = DEFAULT_WARMUPS,
        workdir: Optional[Path] = None,
    ):
        self.compiler = find_compiler(compiler)
        self.flags = list(flags) if flags is not None else list(CC_FLAGS)
        self.runs = runs
        self.warmups = warmups
        self.workdir = workdir

    def measure(self, nest, source, vf=None, if_=None, compile_timeout=None, run_timeout=None) -> BackendResult:
        with tempfile.TemporaryDirectory(dir=self.workdir) as tmp:
            tag = "base" if vf is None else f"vf{vf}_if{if_}"
            path = Path(tmp) / f"{tag}.c"
            path.write_text(source, encoding="utf-8")
            try:
                compile_time, exec_time = clang_backend_measure(
                    path,
                    self.flags,
                    runs=self.runs,
                    warmups=self.warmups,
                    timeout=compile_timeout if compile_timeout is not None else CC_BASE_TIMEOUT,
                    run_timeout=run_timeout,
                    compiler=self.compiler,
                )
            except RunTimeoutError as e:
                logger.debug("Timeout for %s (%s): %s", nest.nest_id, tag, e.detail)
                return BackendResult(status=CompileStatus.TIMEOUT, compile_time=float(e.context.get("elapsed", 0.0)))
            except CompileError as e:
                logger.debug("Compile error for %s (%s): %s", nest.nest_id, tag, e.detail)
                return BackendResult(status=CompileStatus.ERROR, compile_time=0.0)
        return BackendResult(status=CompileStatus.OK, compile_time=compile_time, exec_time=exec_time)


def make_backend(config: EnvConfig) -> Backend:
    if config.backend == BACKEND_SIM:
        return SimBackend(compile_model=config.sim_compile_model)
    if config.backend == BACKEND_CLANG:
        return ClangBackend(
            compiler=config.compiler or CC_PATH,
            flags=config.flags,
            runs=config.runs,
            warmups=config.warmups,
        )
    raise BackendUnavailableError(detail=f"Unknown backend {config.backend!r}")
