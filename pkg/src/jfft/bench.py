"""Timing harness: factored apply (per backend) against a dense matvec."""

import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .transform import apply_forward, compile_plan, dense_matrix, FunctionVector


@dataclass
class BackendTiming:
    backend: str
    median_s: float
    mean_s: float
    speedup_vs_dense: float


@dataclass
class BenchResult:
    n: int
    k: int
    dim: int
    repeat: int
    factored_muladds: int
    dense_muladds: int
    dense_median_s: float
    timings: list[BackendTiming] = field(default_factory=list)

    def format_text(self) -> str:
        lines = [
            f"n={self.n} k={self.k} C(n,k)={self.dim} repeat={self.repeat}",
            f"factored muladds per apply: {self.factored_muladds}",
            f"dense matvec muladds:       {self.dense_muladds}",
            f"op reduction:               {self.dense_muladds / max(self.factored_muladds, 1):.1f}x",
            f"dense matvec median:        {self.dense_median_s * 1e6:.1f} us",
        ]
        for t in self.timings:
            lines.append(
                f"factored[{t.backend}] median:    {t.median_s * 1e6:.1f} us "
                f"(mean {t.mean_s * 1e6:.1f} us, {t.speedup_vs_dense:.1f}x vs dense)"
            )
        return "\n".join(lines)


def _time_repeated(fn, repeat: int) -> tuple[float, float]:
    samples = np.empty(repeat)
    for t in range(repeat):
        start = time.perf_counter()
        fn()
        samples[t] = time.perf_counter() - start
    return float(np.median(samples)), float(samples.mean())


def run_bench(plan, repeat: int = 100, seed: int = 0,
              backends: tuple[str, ...] | None = None) -> BenchResult:
    """Median/mean wall time over `repeat` runs for every requested backend,
    against a dense matvec with the full transform matrix."""
    dims = plan.dims
    cp = compile_plan(plan)
    rng = np.random.default_rng(seed)
    f = FunctionVector(dims, rng.standard_normal(dims.dim))
    g = dense_matrix(plan)

    if backends is None:
        backends = kernels.available_backends()

    result = BenchResult(
        n=dims.n,
        k=dims.k,
        dim=dims.dim,
        repeat=repeat,
        factored_muladds=cp.muladds_forward,
        dense_muladds=dims.dim * dims.dim,
        dense_median_s=0.0,
    )

    dense_median, _ = _time_repeated(lambda: g @ f.values, repeat)
    result.dense_median_s = dense_median

    for backend in backends:
        apply_forward(plan, f, backend=backend)  # warm up (JIT compile)
        median, mean = _time_repeated(lambda: apply_forward(plan, f, backend=backend), repeat)
        result.timings.append(
            BackendTiming(backend, median, mean, dense_median / median if median > 0 else float("inf"))
        )
    return result
