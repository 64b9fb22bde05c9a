"""Dense brute-force ground truth, deliberately O(C(n,k)^3).

Two independent routes pin down the isotypic structure: eigenspaces of the
Johnson-graph adjacency operator (grouped numerically, identified by
multiplicities), and a reference final basis obtained by refining subspaces
against the commuting Jucys-Murphy family.  Both are used to validate factor
plans and the transforms built on them.
"""

from dataclasses import dataclass
from math import comb

import numpy as np

from .combinatorics import (
    ProblemDims,
    box_content,
    enumerate_labels,
    enumerate_points,
    point_index,
    tab_from_contents,
)
from .errors import BudgetError, InternalError, check_budget
from .transform import FunctionVector, dense_matrix, project

DEFAULT_MAX_DIM = 5000
GROUP_TOL = 1e-6


def _check_scale(dims: ProblemDims, max_dim: int) -> None:
    if dims.dim > max_dim:
        raise BudgetError(
            f"oracle capped at C(n,k) <= {max_dim}, got {dims.dim}"
        )
    check_budget(dims.dim * dims.dim * 8 * 4, "dense oracle operators")


def adjacency(dims: ProblemDims, max_dim: int = DEFAULT_MAX_DIM) -> np.ndarray:
    """0/1 matrix connecting subsets that overlap in k-1 elements."""
    _check_scale(dims, max_dim)
    words = enumerate_points(dims)
    bits = np.array([[1.0 if c == "1" else 0.0 for c in w] for w in words])
    overlap = bits @ bits.T
    return (np.abs(overlap - (dims.k - 1)) < 0.5).astype(np.float64)


def yjm_dense(dims: ProblemDims, i: int, max_dim: int = DEFAULT_MAX_DIM) -> np.ndarray:
    """X_i = (1 i) + ... + (i-1 i) as a dense matrix over points."""
    _check_scale(dims, max_dim)
    words = enumerate_points(dims)
    pidx = point_index(dims)
    c = dims.dim
    out = np.zeros((c, c))
    for j in range(i - 1):
        for x, w in enumerate(words):
            if w[j] == w[i - 1]:
                out[x, x] += 1.0
            else:
                swapped = w[:j] + w[i - 1] + w[j + 1 : i - 1] + w[j] + w[i:]
                out[x, pidx[swapped]] += 1.0
    return out


def _group_eigenvalues(evals: np.ndarray, tol: float = GROUP_TOL) -> list[slice]:
    """Split ascending eigenvalues into clusters; the true spectra here are
    integers at least 1 apart, so anything between tol and 0.5 is an error,
    never a silent merge."""
    groups: list[slice] = []
    start = 0
    for t in range(1, len(evals) + 1):
        if t == len(evals) or evals[t] - evals[t - 1] > tol:
            groups.append(slice(start, t))
            start = t
    for g in groups:
        if evals[g.stop - 1] - evals[g.start] > tol:
            raise InternalError(
                f"eigenvalue cluster {evals[g]} wider than tolerance {tol:.1e}"
            )
    for a, b in zip(groups, groups[1:]):
        if evals[b.start] - evals[a.stop - 1] < 0.5:
            raise InternalError(
                f"eigenvalue gap {evals[b.start] - evals[a.stop - 1]:.3e} "
                f"too small to group cleanly"
            )
    return groups


def isotypic_projectors(dims: ProblemDims, max_dim: int = DEFAULT_MAX_DIM) -> list[np.ndarray]:
    """Orthogonal projectors onto the s+1 adjacency eigenspaces, indexed by
    descending eigenvalue; multiplicities are cross-checked against the
    dimension formula C(n,a) - C(n,a-1)."""
    _check_scale(dims, max_dim)
    evals, evecs = np.linalg.eigh(adjacency(dims, max_dim))
    groups = _group_eigenvalues(evals)
    if len(groups) != dims.s + 1:
        raise InternalError(
            f"adjacency has {len(groups)} eigenvalue groups, expected {dims.s + 1}"
        )
    projectors = []
    for a, g in enumerate(reversed(groups)):
        mult = g.stop - g.start
        want = comb(dims.n, a) - (comb(dims.n, a - 1) if a >= 1 else 0)
        if mult != want:
            raise InternalError(
                f"component {a} has multiplicity {mult}, expected {want}"
            )
        u = evecs[:, g]
        projectors.append(u @ u.T)
    total = sum(projectors)
    if np.abs(total - np.eye(dims.dim)).max() > 1e-9:
        raise InternalError("projectors do not sum to the identity")
    const = np.ones(dims.dim)
    if np.abs(projectors[0] @ const - const).max() > 1e-9:
        raise InternalError("component 0 projector does not fix constants")
    return projectors


def gt_reference_basis(dims: ProblemDims, order: str = "ascending",
                       resid_tol: float = 1e-8,
                       max_dim: int = DEFAULT_MAX_DIM) -> tuple[np.ndarray, tuple[str, ...]]:
    """Reference final basis by iterative subspace refinement.

    Every current subspace is split into eigenspaces of each X_i in turn
    (the family commutes, so the refinement order is irrelevant); terminal
    one-dimensional lines are labelled by their integer eigenvalue
    sequences, which are exactly the tableau content sequences.

    Returns (columns, rowseqs) in canonical final-basis order, column signs
    fixed by making the first nonzero coordinate positive.
    """
    _check_scale(dims, max_dim)
    c = dims.dim
    yjms = {i: yjm_dense(dims, i, max_dim) for i in range(2, dims.n + 1)}
    if order == "ascending":
        sequence = list(range(2, dims.n + 1))
    elif order == "descending":
        sequence = list(range(dims.n, 1, -1))
    else:
        raise InternalError(f"unknown refinement order {order!r}")

    subspaces = [np.eye(c)]
    for i in sequence:
        refined = []
        for v in subspaces:
            if v.shape[1] == 1:
                refined.append(v)
                continue
            s = v.T @ yjms[i] @ v
            evals, evecs = np.linalg.eigh(0.5 * (s + s.T))
            for g in _group_eigenvalues(evals):
                refined.append(v @ evecs[:, g])
        subspaces = refined

    for v in subspaces:
        if v.shape[1] != 1:
            raise InternalError(
                f"refinement left a subspace of dimension {v.shape[1]}; "
                f"the commuting family should separate everything"
            )

    cols = {}
    for v in subspaces:
        vec = v[:, 0].copy()
        nz = np.nonzero(np.abs(vec) > 1e-12)[0]
        if len(nz) == 0:
            raise InternalError("refinement produced a zero column")
        if vec[nz[0]] < 0:
            vec = -vec
        contents = [0]
        for i in range(2, dims.n + 1):
            rayleigh = vec @ yjms[i] @ vec
            ci = int(round(rayleigh))
            if np.abs(yjms[i] @ vec - ci * vec).max() > resid_tol:
                raise InternalError(
                    f"reference column is not an X_{i} eigenvector within {resid_tol:.1e}"
                )
            contents.append(ci)
        tab = tab_from_contents(contents)
        if tab in cols:
            raise InternalError(f"duplicate reference label {tab!r}")
        cols[tab] = vec

    expected = [lab.tab for lab in enumerate_labels(dims, dims.n)]
    if set(cols) != set(expected):
        raise InternalError("reference labels do not match the admissible tableaux")
    matrix = np.column_stack([cols[tab] for tab in expected])
    return matrix, tuple(expected)


def gt_characterization_residual(plan, max_dim: int = DEFAULT_MAX_DIM) -> float:
    """Largest |X_i v - c_i v| entry over all final columns v of the plan
    and all levels i, where c_i is the content of box i of the column's
    tableau."""
    dims = plan.dims
    _check_scale(dims, max_dim)
    cols = dense_matrix(plan).T
    tabs = [lab.tab for lab in enumerate_labels(dims, dims.n)]
    worst = 0.0
    for i in range(2, dims.n + 1):
        xi = yjm_dense(dims, i, max_dim)
        contents = np.array([box_content(tab, i) for tab in tabs], dtype=np.float64)
        resid = xi @ cols - cols * contents[None, :]
        worst = max(worst, float(np.abs(resid).max()))
    return worst


@dataclass
class OracleComparison:
    """Worst-case deviations between a plan and the dense oracles."""

    max_basis_deviation: float
    max_projector_error: float


def compare_plan_to_oracle(plan, n_vectors: int = 20, seed: int = 0,
                           max_dim: int = DEFAULT_MAX_DIM) -> OracleComparison:
    """Match every plan column against the reference column with the same
    tableau (reporting 1 - |dot|), and compare component projections against
    the adjacency projectors on random vectors."""
    dims = plan.dims
    _check_scale(dims, max_dim)
    g = dense_matrix(plan)
    ref, _ = gt_reference_basis(dims, max_dim=max_dim)

    dots = np.einsum("ij,ji->i", g, ref)
    basis_dev = float((1.0 - np.abs(dots)).max())

    projectors = isotypic_projectors(dims, max_dim)
    rng = np.random.default_rng(seed)
    proj_err = 0.0
    for _ in range(n_vectors):
        f = FunctionVector(dims, rng.standard_normal(dims.dim))
        for a, p in enumerate(projectors):
            h, _ = project(plan, f, {a})
            proj_err = max(proj_err, float(np.abs(h.values - p @ f.values).max()))
    return OracleComparison(basis_dev, proj_err)


def permute_points(dims: ProblemDims, sigma) -> np.ndarray:
    """Index permutation of the natural action: position perm[x] receives
    the value at x when ground elements are relabelled by sigma (1-based)."""
    sigma = list(sigma)
    if sorted(sigma) != list(range(1, dims.n + 1)):
        raise InternalError(f"{sigma} is not a permutation of 1..{dims.n}")
    pidx = point_index(dims)
    out = np.empty(dims.dim, dtype=np.int64)
    for x, w in enumerate(enumerate_points(dims)):
        letters = ["2"] * dims.n
        for pos, c in enumerate(w):
            if c == "1":
                letters[sigma[pos] - 1] = "1"
        out[x] = pidx["".join(letters)]
    return out
