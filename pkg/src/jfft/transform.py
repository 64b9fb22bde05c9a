"""Applying factor plans to function vectors.

Forward transform (delta-basis values to final-basis coordinates), inverse,
isotypic projection onto a component set H, and component weights, all with
exact multiply-add counters.  One fused multiply-add counts as a single
operation; pure index moves are free.
"""

import contextlib
from dataclasses import dataclass

import numpy as np

from . import kernels
from .combinatorics import (
    ProblemDims,
    enumerate_labels,
    enumerate_points,
    point_index,
    subset_of_word,
    word_of_subset,
)
from .errors import InputError, check_budget
from .planner import FactorPlan, level1_permutation


@dataclass
class OpCounter:
    """Count of fused multiply-add operations performed by one call."""

    muladds: int = 0

    def add(self, n: int) -> None:
        if n < 0:
            raise ValueError("operation counts only grow")
        self.muladds += n


@dataclass
class FunctionVector:
    """Real (or complex) values on k-subsets, in canonical point order."""

    dims: ProblemDims
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.shape != (self.dims.dim,):
            raise InputError(
                f"expected {self.dims.dim} values, got shape {self.values.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise InputError("function values must be finite")

    @classmethod
    def zeros(cls, dims: ProblemDims) -> "FunctionVector":
        return cls(dims, np.zeros(dims.dim))

    @classmethod
    def delta(cls, dims: ProblemDims, subset) -> "FunctionVector":
        values = np.zeros(dims.dim)
        values[point_index(dims)[word_of_subset(subset, dims)]] = 1.0
        return cls(dims, values)

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))


@dataclass
class GTVector:
    """Coordinates in the final basis, canonical order (rowseq lex); index j
    carries the tableau `labels()[j]` whose row-2 length is the component."""

    dims: ProblemDims
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.shape != (self.dims.dim,):
            raise InputError(
                f"expected {self.dims.dim} coordinates, got shape {self.values.shape}"
            )

    def labels(self) -> list[tuple[str, int]]:
        return gt_labels(self.dims)

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))


def gt_labels(dims: ProblemDims) -> list[tuple[str, int]]:
    """(rowseq, component) for every final-basis index, canonical order."""
    return [(lab.tab, lab.tab.count("2")) for lab in enumerate_labels(dims, dims.n)]


def compile_plan(plan: FactorPlan) -> kernels.CompiledPlan:
    """Flatten a plan into the kernel arrays; cached on the plan object."""
    cached = getattr(plan, "_compiled", None)
    if cached is not None:
        return cached

    dims = plan.dims
    n_levels = len(plan.levels)
    sing_src: list[int] = []
    sing_dst: list[int] = []
    sing_off = [0]
    ps1: list[int] = []
    ps2: list[int] = []
    pd1: list[int] = []
    pd2: list[int] = []
    rot = ([], [], [], [])
    pair_off = [0]
    for blocks in plan.levels:
        for b in blocks:
            if b.is_pair:
                ps1.append(b.srcs[0])
                ps2.append(b.srcs[1])
                pd1.append(b.dsts[0])
                pd2.append(b.dsts[1])
                for slot, val in zip(rot, (b.coeffs[0][0], b.coeffs[0][1],
                                           b.coeffs[1][0], b.coeffs[1][1])):
                    slot.append(val)
            else:
                sing_src.append(b.srcs[0])
                sing_dst.append(b.dsts[0])
        sing_off.append(len(sing_src))
        pair_off.append(len(ps1))

    a_of = np.array([lab.tab.count("2") for lab in enumerate_labels(dims, dims.n)],
                    dtype=np.int64)
    cp = kernels.CompiledPlan(
        dim=dims.dim,
        n_levels=n_levels,
        perm01=level1_permutation(dims),
        sing_src=np.array(sing_src, dtype=np.int64),
        sing_dst=np.array(sing_dst, dtype=np.int64),
        sing_off=np.array(sing_off, dtype=np.int64),
        ps1=np.array(ps1, dtype=np.int64),
        ps2=np.array(ps2, dtype=np.int64),
        pd1=np.array(pd1, dtype=np.int64),
        pd2=np.array(pd2, dtype=np.int64),
        r11=np.array(rot[0], dtype=np.float64),
        r12=np.array(rot[1], dtype=np.float64),
        r21=np.array(rot[2], dtype=np.float64),
        r22=np.array(rot[3], dtype=np.float64),
        pair_off=np.array(pair_off, dtype=np.int64),
        a_of=a_of,
        n_components=dims.s + 1,
    )
    plan._compiled = cp
    return cp


def _as_working(values: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(values):
        return np.asarray(values, dtype=np.complex128)
    return np.asarray(values, dtype=np.float64)


def _check_dims(plan: FactorPlan, dims: ProblemDims) -> None:
    if plan.dims != dims:
        raise InputError(
            f"plan is for n={plan.dims.n}, k={plan.dims.k}; "
            f"vector has n={dims.n}, k={dims.k}"
        )


def apply_forward(plan: FactorPlan, f: FunctionVector,
                  backend: str | None = None) -> tuple[GTVector, OpCounter]:
    _check_dims(plan, f.dims)
    cp = compile_plan(plan)
    out = kernels.forward_values(cp, _as_working(f.values), backend)
    counter = OpCounter()
    counter.add(cp.muladds_forward)
    return GTVector(f.dims, out), counter


def apply_inverse(plan: FactorPlan, g: GTVector,
                  backend: str | None = None) -> tuple[FunctionVector, OpCounter]:
    _check_dims(plan, g.dims)
    cp = compile_plan(plan)
    out = kernels.inverse_values(cp, _as_working(g.values), backend)
    counter = OpCounter()
    counter.add(cp.muladds_forward)
    return FunctionVector(g.dims, out), counter


def _check_components(components, s: int) -> frozenset[int]:
    comps = frozenset(int(a) for a in components)
    bad = [a for a in comps if not 0 <= a <= s]
    if bad:
        raise InputError(f"components {sorted(bad)} outside 0..{s}")
    return comps


def project(plan: FactorPlan, f: FunctionVector, components,
            backend: str | None = None) -> tuple[FunctionVector, OpCounter]:
    """Projection onto the sum of the isotypic components in `components`:
    forward, zero the excluded coordinates, inverse."""
    _check_dims(plan, f.dims)
    comps = _check_components(components, f.dims.s)
    cp = compile_plan(plan)
    counter = OpCounter()
    g, fwd_ops = apply_forward(plan, f, backend)
    counter.add(fwd_ops.muladds)
    if comps:
        keep = np.isin(cp.a_of, sorted(comps))
        filtered = np.where(keep, g.values, 0.0)
    else:
        filtered = np.zeros_like(g.values)
    h, inv_ops = apply_inverse(plan, GTVector(f.dims, filtered), backend)
    counter.add(inv_ops.muladds)
    return h, counter


def weights(plan: FactorPlan, f: FunctionVector,
            backend: str | None = None) -> tuple[np.ndarray, OpCounter]:
    """Squared norms of the isotypic pieces: one forward transform plus one
    multiply-add per coordinate to accumulate the squares."""
    _check_dims(plan, f.dims)
    cp = compile_plan(plan)
    counter = OpCounter()
    g, fwd_ops = apply_forward(plan, f, backend)
    counter.add(fwd_ops.muladds)
    sq = np.abs(g.values) ** 2 if np.iscomplexobj(g.values) else g.values * g.values
    w = np.bincount(cp.a_of, weights=sq, minlength=cp.n_components)
    counter.add(cp.dim)
    return w, counter


def dense_matrix(plan: FactorPlan) -> np.ndarray:
    """The full change-of-basis matrix G with [f]_final = G @ [f]_points,
    built by pushing the identity through the factors."""
    c = plan.dims.dim
    check_budget(c * c * 8 * 2, "dense transform matrix")
    cp = compile_plan(plan)
    return kernels.forward_values(cp, np.eye(c), backend="numpy")


# -- CSV formats ------------------------------------------------------------
#
# Function files:  subset,value     subset = dash-joined increasing 1-based
#                                   integers ("" for the empty subset)
# Coordinates:     rowseq,a,value   canonical final-basis order
# Weights:         a,weight

def format_value(x: float) -> str:
    return format(float(x), ".17g")


def subset_string(word: str) -> str:
    return "-".join(str(e) for e in subset_of_word(word))


def parse_subset(text: str, dims: ProblemDims) -> str:
    """Parse a dash-joined subset field into its word encoding."""
    text = text.strip()
    if not text:
        elements = []
    else:
        try:
            elements = [int(tok) for tok in text.split("-")]
        except ValueError as exc:
            raise InputError(f"bad subset field {text!r}") from exc
    return word_of_subset(elements, dims)


@contextlib.contextmanager
def _reading(source):
    if hasattr(source, "read"):
        yield source
    else:
        with open(source, "r", encoding="ascii") as fh:
            yield fh


@contextlib.contextmanager
def _writing(dest):
    if hasattr(dest, "write"):
        yield dest
    else:
        with open(dest, "w", encoding="ascii", newline="") as fh:
            yield fh


def read_function_csv(source, dims: ProblemDims) -> FunctionVector:
    """Sparse subset,value records; unlisted subsets are zero, duplicates
    are an error."""
    pidx = point_index(dims)
    values = np.zeros(dims.dim)
    seen = set()
    with _reading(source) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise InputError(f"line {lineno}: expected 'subset,value', got {line!r}")
            try:
                word = parse_subset(parts[0], dims)
            except InputError as exc:
                raise InputError(f"line {lineno}: {exc}") from exc
            if word in seen:
                raise InputError(f"line {lineno}: duplicate subset {parts[0]!r}")
            seen.add(word)
            try:
                values[pidx[word]] = float(parts[1])
            except ValueError as exc:
                raise InputError(f"line {lineno}: bad value {parts[1]!r}") from exc
    return FunctionVector(dims, values)


def write_function_csv(f: FunctionVector, dest) -> None:
    """All C(n,k) subsets in canonical order; byte-deterministic."""
    with _writing(dest) as fh:
        for word, v in zip(enumerate_points(f.dims), f.values):
            fh.write(f"{subset_string(word)},{format_value(v)}\n")


def read_gt_csv(source, dims: ProblemDims) -> GTVector:
    positions = {lab.tab: j for j, lab in enumerate(enumerate_labels(dims, dims.n))}
    values = np.zeros(dims.dim)
    seen = set()
    with _reading(source) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise InputError(f"line {lineno}: expected 'rowseq,a,value', got {line!r}")
            tab, a_text, v_text = parts
            if tab not in positions:
                raise InputError(f"line {lineno}: {tab!r} is not a final-basis tableau here")
            try:
                a = int(a_text)
                v = float(v_text)
            except ValueError as exc:
                raise InputError(f"line {lineno}: bad numeric field") from exc
            if a != tab.count("2"):
                raise InputError(
                    f"line {lineno}: component {a} does not match tableau {tab!r}"
                )
            if tab in seen:
                raise InputError(f"line {lineno}: duplicate tableau {tab!r}")
            seen.add(tab)
            values[positions[tab]] = v
    return GTVector(dims, values)


def write_gt_csv(g: GTVector, dest) -> None:
    with _writing(dest) as fh:
        for (tab, a), v in zip(gt_labels(g.dims), g.values):
            fh.write(f"{tab},{a},{format_value(v)}\n")


def write_weights_csv(w: np.ndarray, dest) -> None:
    with _writing(dest) as fh:
        for a, val in enumerate(w):
            fh.write(f"{a},{format_value(val)}\n")
