"""Hot apply loops: numba kernels with a pure-numpy fallback.

Set JFFT_PURE_NUMPY=1 to force the fallback even when numba is installed.
Both paths consume the same flattened plan arrays and perform identical
arithmetic; `jfft bench` times them side by side.
"""

import os

import numpy as np
from dataclasses import dataclass

from .errors import InputError

_FORCE_NUMPY = os.environ.get("JFFT_PURE_NUMPY", "").strip().lower() in ("1", "true", "yes")

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap


DEFAULT_BACKEND = "numba" if (HAS_NUMBA and not _FORCE_NUMPY) else "numpy"


def available_backends() -> tuple[str, ...]:
    return ("numba", "numpy") if HAS_NUMBA else ("numpy",)


@dataclass
class CompiledPlan:
    """Flattened factor arrays: per-level slices of singleton index moves
    and pair rotations, plus the delta-basis-to-level-1 permutation."""

    dim: int
    n_levels: int
    perm01: np.ndarray  # (dim,) level-1 position -> point index
    sing_src: np.ndarray
    sing_dst: np.ndarray
    sing_off: np.ndarray  # (n_levels + 1,)
    ps1: np.ndarray
    ps2: np.ndarray
    pd1: np.ndarray
    pd2: np.ndarray
    r11: np.ndarray
    r12: np.ndarray
    r21: np.ndarray
    r22: np.ndarray
    pair_off: np.ndarray  # (n_levels + 1,)
    a_of: np.ndarray  # (dim,) row-2 length of each final tableau
    n_components: int  # s + 1

    @property
    def muladds_forward(self) -> int:
        """Exact multiply-add count of one apply: 4 per pair block (2 per
        output coordinate), 0 for index moves."""
        return 4 * int(self.pair_off[-1])


@njit(cache=True)
def _forward_loop(cur, nxt, sing_src, sing_dst, sing_off,
                  ps1, ps2, pd1, pd2, r11, r12, r21, r22, pair_off):
    n_levels = sing_off.shape[0] - 1
    for lvl in range(n_levels):
        for t in range(sing_off[lvl], sing_off[lvl + 1]):
            nxt[sing_dst[t]] = cur[sing_src[t]]
        for t in range(pair_off[lvl], pair_off[lvl + 1]):
            a = cur[ps1[t]]
            b = cur[ps2[t]]
            nxt[pd1[t]] = r11[t] * a + r12[t] * b
            nxt[pd2[t]] = r21[t] * a + r22[t] * b
        tmp = cur
        cur = nxt
        nxt = tmp
    return cur


@njit(cache=True)
def _inverse_loop(cur, nxt, sing_src, sing_dst, sing_off,
                  ps1, ps2, pd1, pd2, r11, r12, r21, r22, pair_off):
    n_levels = sing_off.shape[0] - 1
    for lvl in range(n_levels - 1, -1, -1):
        for t in range(sing_off[lvl], sing_off[lvl + 1]):
            nxt[sing_src[t]] = cur[sing_dst[t]]
        for t in range(pair_off[lvl], pair_off[lvl + 1]):
            g1 = cur[pd1[t]]
            g2 = cur[pd2[t]]
            nxt[ps1[t]] = r11[t] * g1 + r21[t] * g2
            nxt[ps2[t]] = r12[t] * g1 + r22[t] * g2
        tmp = cur
        cur = nxt
        nxt = tmp
    return cur


def _forward_numpy(cp: CompiledPlan, cur: np.ndarray) -> np.ndarray:
    batched = cur.ndim == 2
    nxt = np.empty_like(cur)
    for lvl in range(cp.n_levels):
        a, b = cp.sing_off[lvl], cp.sing_off[lvl + 1]
        nxt[cp.sing_dst[a:b]] = cur[cp.sing_src[a:b]]
        a, b = cp.pair_off[lvl], cp.pair_off[lvl + 1]
        x1 = cur[cp.ps1[a:b]]
        x2 = cur[cp.ps2[a:b]]
        c11, c12 = cp.r11[a:b], cp.r12[a:b]
        c21, c22 = cp.r21[a:b], cp.r22[a:b]
        if batched:
            c11, c12, c21, c22 = c11[:, None], c12[:, None], c21[:, None], c22[:, None]
        nxt[cp.pd1[a:b]] = c11 * x1 + c12 * x2
        nxt[cp.pd2[a:b]] = c21 * x1 + c22 * x2
        cur, nxt = nxt, cur
    return cur


def _inverse_numpy(cp: CompiledPlan, cur: np.ndarray) -> np.ndarray:
    batched = cur.ndim == 2
    nxt = np.empty_like(cur)
    for lvl in range(cp.n_levels - 1, -1, -1):
        a, b = cp.sing_off[lvl], cp.sing_off[lvl + 1]
        nxt[cp.sing_src[a:b]] = cur[cp.sing_dst[a:b]]
        a, b = cp.pair_off[lvl], cp.pair_off[lvl + 1]
        g1 = cur[cp.pd1[a:b]]
        g2 = cur[cp.pd2[a:b]]
        c11, c12 = cp.r11[a:b], cp.r12[a:b]
        c21, c22 = cp.r21[a:b], cp.r22[a:b]
        if batched:
            c11, c12, c21, c22 = c11[:, None], c12[:, None], c21[:, None], c22[:, None]
        nxt[cp.ps1[a:b]] = c11 * g1 + c21 * g2
        nxt[cp.ps2[a:b]] = c12 * g1 + c22 * g2
        cur, nxt = nxt, cur
    return cur


def _resolve(backend: str | None, ndim: int) -> str:
    if backend is None:
        backend = DEFAULT_BACKEND
    if backend not in ("numba", "numpy"):
        raise InputError(f"unknown backend {backend!r}; use 'numba' or 'numpy'")
    if backend == "numba" and not HAS_NUMBA:
        raise InputError("numba backend requested but numba is not installed")
    if ndim > 1:
        return "numpy"  # batched applies go through the vectorized path
    return backend


def forward_values(cp: CompiledPlan, values: np.ndarray, backend: str | None = None) -> np.ndarray:
    """Point-order values -> final-basis coordinates.  Input is not modified."""
    which = _resolve(backend, values.ndim)
    cur = np.ascontiguousarray(values[cp.perm01])
    if which == "numba":
        return _forward_loop(cur, np.empty_like(cur), cp.sing_src, cp.sing_dst,
                             cp.sing_off, cp.ps1, cp.ps2, cp.pd1, cp.pd2,
                             cp.r11, cp.r12, cp.r21, cp.r22, cp.pair_off)
    return _forward_numpy(cp, cur)


def inverse_values(cp: CompiledPlan, values: np.ndarray, backend: str | None = None) -> np.ndarray:
    """Final-basis coordinates -> point-order values.  Input is not modified."""
    which = _resolve(backend, values.ndim)
    cur = np.ascontiguousarray(values).copy()
    if which == "numba":
        res = _inverse_loop(cur, np.empty_like(cur), cp.sing_src, cp.sing_dst,
                            cp.sing_off, cp.ps1, cp.ps2, cp.pd1, cp.pd2,
                            cp.r11, cp.r12, cp.r21, cp.r22, cp.pair_off)
    else:
        res = _inverse_numpy(cp, cur)
    out = np.empty_like(res)
    out[cp.perm01] = res
    return out
