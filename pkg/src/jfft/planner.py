"""Construction of the sparse orthogonal factor sequence.

A factor plan holds, for every level i = 2..n, a partition of the adjacent
bases into 1x1 and 2x2 blocks.  Pair-block coefficients are found by
restricting the level-i Jucys-Murphy operator  X_i = (1 i) + ... + (i-1 i)
to the two-dimensional block span and diagonalizing: the eigenvector whose
eigenvalue matches the content of the row-1 extension box becomes the
row-1 destination row.  The eigenvalue/content match is verified at build
time, which makes the construction self-checking.
"""

import hashlib
import json
import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .combinatorics import (
    BasisLabel,
    ProblemDims,
    enumerate_labels,
    enumerate_points,
    is_admissible,
    ones,
    point_index,
    shape_of_tab,
    _label_positions,
)
from .errors import (
    InputError,
    InternalError,
    NumericalError,
    PlanFormatError,
    VerificationError,
    check_budget,
)

PLAN_FORMAT_VERSION = 1

# Tolerances; overridable per call.
ORTH_TOL = 1e-12
CONTENT_TOL = 1e-6
SYM_TOL = 1e-10
SIGN_ZERO_TOL = 1e-12


@dataclass(frozen=True)
class Block:
    """One orthogonal block of the level-i factor.

    srcs index the level i-1 basis (letter-1 predecessor first), dsts the
    level-i basis (row-1 extension first).  coeffs is the 2x2 orthogonal
    matrix with rows indexed by dsts and columns by srcs; None for
    singletons, whose implicit coefficient is +1.
    """

    level: int
    frame_tab: str
    frame_tail: str
    srcs: tuple[int, ...]
    dsts: tuple[int, ...]
    coeffs: tuple[tuple[float, float], tuple[float, float]] | None = None

    @property
    def is_pair(self) -> bool:
        return len(self.srcs) == 2


@dataclass
class FactorPlan:
    """The ordered factor sequence for one (n, k); levels[j] holds the
    blocks of level i = j + 2."""

    dims: ProblemDims
    levels: list[list[Block]]
    version: int = PLAN_FORMAT_VERSION

    def level_blocks(self, i: int) -> list[Block]:
        if not 2 <= i <= self.dims.n:
            raise InputError(f"level must be in 2..{self.dims.n}, got {i}")
        return self.levels[i - 2]


def predecessors(label: BasisLabel, dims: ProblemDims) -> list[BasisLabel]:
    """The 1 or 2 level-(i-1) labels not orthogonal to `label`: restrict the
    tableau by its last box and prepend either letter to the tail."""
    if label.level < 1 or not is_admissible(label, dims):
        raise InputError(f"label {label} is not admissible")
    out = []
    for c in "12":
        cand = BasisLabel(label.level - 1, label.tab[:-1], c + label.tail)
        if is_admissible(cand, dims):
            out.append(cand)
    if not out:
        raise InternalError(f"label {label} has no admissible predecessor")
    return out


def level1_permutation(dims: ProblemDims) -> np.ndarray:
    """Index map from canonical level-1 order to point order.

    The level-1 basis is the delta basis re-labelled: the label with tail w
    names the delta function of the unique point completing w.
    """
    pidx = point_index(dims)
    perm = np.empty(dims.dim, dtype=np.int64)
    for j, lab in enumerate(enumerate_labels(dims, 1)):
        r = dims.k - ones(lab.tail)
        word = ("1" if r == 1 else "2") + lab.tail
        perm[j] = pidx[word]
    return perm


def group_blocks(dims: ProblemDims, i: int) -> list[Block]:
    """Partition bases i-1 and i into blocks keyed by (restricted tableau,
    level-i tail).  Returned without coefficients, in canonical frame
    order."""
    if not 2 <= i <= dims.n:
        raise InputError(f"level must be in 2..{dims.n}, got {i}")
    idx_prev = _label_positions(dims, i - 1)
    frames: dict[tuple[str, str], list[int]] = {}
    for j, lab in enumerate(enumerate_labels(dims, i)):
        frames.setdefault((lab.tab[:-1], lab.tail), []).append(j)

    blocks = []
    src_seen = 0
    for (ftab, ftail), dsts in frames.items():
        srcs = []
        for c in "12":
            cand = BasisLabel(i - 1, ftab, c + ftail)
            if is_admissible(cand, dims):
                srcs.append(idx_prev[cand])
        if len(srcs) != len(dsts) or len(srcs) not in (1, 2):
            raise InternalError(
                f"block {ftab!r}/{ftail!r} at level {i} pairs {len(srcs)} "
                f"sources with {len(dsts)} destinations"
            )
        src_seen += len(srcs)
        blocks.append(Block(i, ftab, ftail, tuple(srcs), tuple(dsts)))

    if src_seen != dims.dim:
        raise InternalError(f"level {i} blocks cover {src_seen} sources, expected {dims.dim}")
    flat_srcs = sorted(s for b in blocks for s in b.srcs)
    if flat_srcs != list(range(dims.dim)):
        raise InternalError(f"level {i} source indices do not partition the basis")
    return blocks


def _yjm_perms(dims: ProblemDims, i: int) -> np.ndarray:
    """Point-index permutations of the i-1 transpositions (j i), j < i."""
    points = enumerate_points(dims)
    pidx = point_index(dims)
    perms = np.empty((i - 1, dims.dim), dtype=np.int64)
    for j in range(i - 1):
        for x, w in enumerate(points):
            if w[j] == w[i - 1]:
                perms[j, x] = x
            else:
                swapped = w[:j] + w[i - 1] + w[j + 1 : i - 1] + w[j] + w[i:]
                perms[j, x] = pidx[swapped]
    return perms


def yjm_apply(vecs: np.ndarray, dims: ProblemDims, i: int) -> np.ndarray:
    """Apply X_i = sum of transpositions (j i) to vector(s) over points."""
    perms = _yjm_perms(dims, i)
    out = np.zeros_like(vecs)
    for j in range(perms.shape[0]):
        out += vecs[perms[j]]
    return out


def yjm_block_matrix(b1: np.ndarray, b2: np.ndarray, i: int, dims: ProblemDims,
                     sym_tol: float = SYM_TOL) -> np.ndarray:
    """2x2 restriction of X_i to span{b1, b2}: entries <b_p, X_i b_q>."""
    y1 = yjm_apply(b1, dims, i)
    y2 = yjm_apply(b2, dims, i)
    m = np.array([[b1 @ y1, b1 @ y2], [b2 @ y1, b2 @ y2]])
    if abs(m[0, 1] - m[1, 0]) > sym_tol:
        raise NumericalError(
            f"block matrix asymmetry {abs(m[0, 1] - m[1, 0]):.3e} exceeds {sym_tol:.1e}"
        )
    return m


def _rotations_batch(mats: np.ndarray, c_lo: np.ndarray, c_hi: np.ndarray,
                     content_tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Diagonalize stacked symmetric 2x2 matrices and orient the result.

    Returns (row1, row2): the coefficient rows for the row-1 and row-2
    destinations, sign-normalized so the letter-1 source entry is >= 0
    (ties broken by a positive letter-2 entry).
    """
    evals, evecs = np.linalg.eigh(mats)  # ascending eigenvalues
    err_lo = np.abs(evals[:, 0] - c_lo)
    err_hi = np.abs(evals[:, 1] - c_hi)
    worst = max(err_lo.max(initial=0.0), err_hi.max(initial=0.0))
    if worst > content_tol:
        t = int(np.argmax(np.maximum(err_lo, err_hi)))
        raise VerificationError(
            f"eigenvalues {evals[t]} do not match box contents "
            f"({c_lo[t]}, {c_hi[t]}) within {content_tol:.1e}"
        )
    row1 = evecs[:, :, 1].copy()
    row2 = evecs[:, :, 0].copy()
    for rows in (row1, row2):
        flip = (rows[:, 0] < -SIGN_ZERO_TOL) | (
            (np.abs(rows[:, 0]) <= SIGN_ZERO_TOL) & (rows[:, 1] < 0)
        )
        rows[flip] *= -1.0
    return row1, row2


def rotation_from_block(m: np.ndarray, frame_shape: tuple[int, int],
                        content_tol: float = CONTENT_TOL) -> np.ndarray:
    """Orient a single 2x2 block matrix into its coefficient matrix."""
    p, q = frame_shape
    m = np.asarray(m, dtype=np.float64)
    row1, row2 = _rotations_batch(
        m[None, :, :], np.array([q - 1.0]), np.array([float(p)]), content_tol
    )
    return np.vstack([row1[0], row2[0]])


def _singleton_content(block: Block) -> int:
    # A singleton's destination is always the row-1 extension (a row-2
    # extension is admissible only when the row-1 one is too).
    p, _ = shape_of_tab(block.frame_tab)
    return p


def build_plan(dims: ProblemDims, *, orth_tol: float = ORTH_TOL,
               content_tol: float = CONTENT_TOL,
               sym_tol: float = SYM_TOL) -> FactorPlan:
    """Build the factor plan by maintaining the current basis as dense
    columns and rotating each block span in turn.

    Dense and O(C(n,k)^2) in memory: plans are built once per (n, k) and
    cached; applying them is the fast path.
    """
    c = dims.dim
    check_budget(3 * c * c * 8, f"plan construction for n={dims.n}, k={dims.k}")

    basis = np.zeros((c, c))
    basis[level1_permutation(dims), np.arange(c)] = 1.0

    levels: list[list[Block]] = []
    for i in range(2, dims.n + 1):
        skeletons = group_blocks(dims, i)
        yb = yjm_apply(basis, dims, i)
        nxt = np.empty_like(basis)

        singles = [b for b in skeletons if not b.is_pair]
        pairs = [b for b in skeletons if b.is_pair]

        if singles:
            ss = np.array([b.srcs[0] for b in singles], dtype=np.int64)
            ds = np.array([b.dsts[0] for b in singles], dtype=np.int64)
            nxt[:, ds] = basis[:, ss]
            vals = np.einsum("ij,ij->j", basis[:, ss], yb[:, ss])
            want = np.array([_singleton_content(b) for b in singles], dtype=np.float64)
            if np.abs(vals - want).max() > content_tol:
                t = int(np.argmax(np.abs(vals - want)))
                raise VerificationError(
                    f"singleton at level {i} has eigenvalue {vals[t]:.9f}, "
                    f"expected content {want[t]:g}"
                )

        finished: dict[int, Block] = {}
        if pairs:
            s1 = np.array([b.srcs[0] for b in pairs], dtype=np.int64)
            s2 = np.array([b.srcs[1] for b in pairs], dtype=np.int64)
            d1 = np.array([b.dsts[0] for b in pairs], dtype=np.int64)
            d2 = np.array([b.dsts[1] for b in pairs], dtype=np.int64)

            m11 = np.einsum("ij,ij->j", basis[:, s1], yb[:, s1])
            m12 = np.einsum("ij,ij->j", basis[:, s1], yb[:, s2])
            m21 = np.einsum("ij,ij->j", basis[:, s2], yb[:, s1])
            m22 = np.einsum("ij,ij->j", basis[:, s2], yb[:, s2])
            asym = np.abs(m12 - m21).max()
            if asym > sym_tol:
                raise NumericalError(
                    f"level {i} block matrices asymmetric by {asym:.3e} (tol {sym_tol:.1e})"
                )
            off = 0.5 * (m12 + m21)
            mats = np.empty((len(pairs), 2, 2))
            mats[:, 0, 0] = m11
            mats[:, 0, 1] = off
            mats[:, 1, 0] = off
            mats[:, 1, 1] = m22

            shapes = np.array([shape_of_tab(b.frame_tab) for b in pairs], dtype=np.float64)
            row1, row2 = _rotations_batch(mats, shapes[:, 1] - 1.0, shapes[:, 0], content_tol)

            gram_err = max(
                np.abs(row1[:, 0] * row1[:, 0] + row1[:, 1] * row1[:, 1] - 1.0).max(),
                np.abs(row2[:, 0] * row2[:, 0] + row2[:, 1] * row2[:, 1] - 1.0).max(),
                np.abs(row1[:, 0] * row2[:, 0] + row1[:, 1] * row2[:, 1]).max(),
            )
            if gram_err > orth_tol:
                raise NumericalError(
                    f"level {i} rotation orthogonality error {gram_err:.3e}"
                )

            nxt[:, d1] = basis[:, s1] * row1[:, 0] + basis[:, s2] * row1[:, 1]
            nxt[:, d2] = basis[:, s1] * row2[:, 0] + basis[:, s2] * row2[:, 1]

            for t, b in enumerate(pairs):
                coeffs = (
                    (float(row1[t, 0]), float(row1[t, 1])),
                    (float(row2[t, 0]), float(row2[t, 1])),
                )
                finished[id(b)] = replace(b, coeffs=coeffs)

        levels.append([finished.get(id(b), b) for b in skeletons])
        basis = nxt

    return FactorPlan(dims=dims, levels=levels)


def validate_plan(plan: FactorPlan, orth_tol: float = ORTH_TOL) -> None:
    """Re-check every structural and coefficient invariant; raises
    VerificationError on the first violation."""
    dims = plan.dims
    if plan.version != PLAN_FORMAT_VERSION:
        raise PlanFormatError(f"unsupported plan version {plan.version}")
    if len(plan.levels) != max(dims.n - 1, 0):
        raise VerificationError(
            f"plan has {len(plan.levels)} levels, expected {dims.n - 1}"
        )
    for j, blocks in enumerate(plan.levels):
        i = j + 2
        expected = group_blocks(dims, i)
        if len(blocks) != len(expected):
            raise VerificationError(f"level {i} has {len(blocks)} blocks, expected {len(expected)}")
        for b, e in zip(blocks, expected):
            if (b.level, b.frame_tab, b.frame_tail, b.srcs, b.dsts) != (
                e.level, e.frame_tab, e.frame_tail, e.srcs, e.dsts,
            ):
                raise VerificationError(
                    f"level {i} block {b.frame_tab!r}/{b.frame_tail!r} does not "
                    f"match the canonical block structure"
                )
            if b.is_pair:
                if b.coeffs is None:
                    raise VerificationError(f"pair block at level {i} lacks coefficients")
                r = np.asarray(b.coeffs, dtype=np.float64)
                if r.shape != (2, 2) or not np.all(np.isfinite(r)):
                    raise VerificationError(f"level {i} block has malformed coefficients")
                if np.abs(r.T @ r - np.eye(2)).max() > orth_tol:
                    raise VerificationError(
                        f"level {i} block {b.frame_tab!r}/{b.frame_tail!r} "
                        f"coefficients are not orthogonal within {orth_tol:.1e}"
                    )
                for row in r:
                    if row[0] < -SIGN_ZERO_TOL or (row[0] <= SIGN_ZERO_TOL and row[1] <= 0):
                        raise VerificationError(
                            f"level {i} block {b.frame_tab!r}/{b.frame_tail!r} "
                            f"violates the sign convention"
                        )
            elif b.coeffs is not None:
                raise VerificationError(f"singleton block at level {i} carries coefficients")


def _fmt(x: float) -> str:
    if not math.isfinite(x):
        raise InternalError(f"non-finite coefficient {x!r}")
    return format(float(x), ".17g")


def _plan_body_json(plan: FactorPlan) -> str:
    """Canonical byte serialization (checksum field excluded)."""
    out = [f'{{"version": {plan.version}, "n": {plan.dims.n}, "k": {plan.dims.k}, "levels": [']
    level_parts = []
    for j, blocks in enumerate(plan.levels):
        bparts = []
        for b in blocks:
            piece = (
                f'{{"frame": {{"tab": {json.dumps(b.frame_tab)}, '
                f'"tail": {json.dumps(b.frame_tail)}}}, '
                f'"srcs": [{", ".join(str(v) for v in b.srcs)}], '
                f'"dsts": [{", ".join(str(v) for v in b.dsts)}]'
            )
            if b.coeffs is not None:
                (a, bb), (c, d) = b.coeffs
                piece += f', "coeffs": [[{_fmt(a)}, {_fmt(bb)}], [{_fmt(c)}, {_fmt(d)}]]'
            bparts.append(piece + "}")
        level_parts.append(f'{{"i": {j + 2}, "blocks": [' + ", ".join(bparts) + "]}")
    out.append(", ".join(level_parts))
    out.append("]}")
    return "".join(out)


def plan_checksum(plan: FactorPlan) -> str:
    return "sha256:" + hashlib.sha256(_plan_body_json(plan).encode("ascii")).hexdigest()


def save_plan(plan: FactorPlan, destination) -> None:
    """Write the canonical JSON serialization (with integrity checksum)."""
    validate_plan(plan)
    body = _plan_body_json(plan)
    digest = "sha256:" + hashlib.sha256(body.encode("ascii")).hexdigest()
    text = body[:-1] + f', "checksum": "{digest}"}}\n'
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        with open(destination, "w", encoding="ascii", newline="") as fh:
            fh.write(text)


def load_plan(source) -> FactorPlan:
    """Parse, checksum-verify and re-validate a plan file."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, "r", encoding="ascii") as fh:
            text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PlanFormatError(f"plan file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise PlanFormatError("plan file must contain a JSON object")
    version = data.get("version")
    if version != PLAN_FORMAT_VERSION:
        raise PlanFormatError(f"unsupported plan version {version!r}")
    try:
        dims = ProblemDims(int(data["n"]), int(data["k"]))
        levels = []
        for lvl in data["levels"]:
            i = int(lvl["i"])
            blocks = []
            for raw in lvl["blocks"]:
                coeffs = None
                if "coeffs" in raw:
                    (a, b), (c, d) = raw["coeffs"]
                    coeffs = ((float(a), float(b)), (float(c), float(d)))
                blocks.append(
                    Block(
                        level=i,
                        frame_tab=str(raw["frame"]["tab"]),
                        frame_tail=str(raw["frame"]["tail"]),
                        srcs=tuple(int(v) for v in raw["srcs"]),
                        dsts=tuple(int(v) for v in raw["dsts"]),
                        coeffs=coeffs,
                    )
                )
            levels.append(blocks)
    except (KeyError, TypeError, ValueError) as exc:
        raise PlanFormatError(f"malformed plan file: {exc!r}") from exc

    plan = FactorPlan(dims=dims, levels=levels, version=int(version))
    stored = data.get("checksum")
    if stored is not None and stored != plan_checksum(plan):
        raise VerificationError("plan checksum mismatch: file contents were altered")
    validate_plan(plan)
    return plan


@lru_cache(maxsize=None)
def cached_plan(dims: ProblemDims) -> FactorPlan:
    """Build-once cache used by tests and benchmarks."""
    return build_plan(dims)
