"""Combinatorial substrate for the Johnson graph J(n,k).

Points of J(n,k) are encoded as length-n words over the alphabet {1,2}:
position i carries letter '1' exactly when element i belongs to the
k-subset.  Two-row Young diagrams are pairs (p, q) with p >= q >= 0, and a
standard tableau is stored as its "rowseq": the string whose j-th character
is the row ('1' or '2') that received box j.  An intermediate basis element
is named by a tableau together with a tail word; this module owns the
canonical orderings of all those labels.
"""

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from math import comb

from .errors import InputError, InternalError

Shape = tuple[int, int]


@dataclass(frozen=True)
class ProblemDims:
    """Ground-set size n and subset size k of a Johnson graph instance."""

    n: int
    k: int

    def __post_init__(self):
        if self.n < 1:
            raise InputError(f"n must be positive, got {self.n}")
        if not 0 <= self.k <= self.n:
            raise InputError(f"k must satisfy 0 <= k <= n, got k={self.k}, n={self.n}")

    @property
    def s(self) -> int:
        """Number of isotypic components minus one: min(k, n-k)."""
        return min(self.k, self.n - self.k)

    @property
    def dim(self) -> int:
        """Number of k-subsets, C(n,k)."""
        return comb(self.n, self.k)


@dataclass(frozen=True)
class BasisLabel:
    """Name of one intermediate-basis element: a tableau with `level` boxes
    plus the tail word fixing the last n-level letters."""

    level: int
    tab: str
    tail: str


@dataclass(frozen=True)
class RSState:
    """Minimal row-insertion state: current shape plus the count m of
    1-letters inserted so far.  The insertion tableau itself is redundant
    for {1,2}-words: its row 2 is all 2s and row 1 is m 1s followed by 2s."""

    shape: Shape
    m: int

    def __post_init__(self):
        p, q = self.shape
        if not (p >= q >= 0):
            raise InputError(f"invalid shape {self.shape}")
        if not 0 <= self.m <= p:
            raise InputError(f"m={self.m} out of range for shape {self.shape}")


def word_of_subset(subset, dims: ProblemDims) -> str:
    """Encode a strictly increasing 1-based k-subset as a {1,2}-word."""
    subset = list(subset)
    if len(subset) != dims.k:
        raise InputError(f"expected {dims.k} elements, got {len(subset)}")
    letters = ["2"] * dims.n
    prev = 0
    for e in subset:
        if not isinstance(e, int) or not 1 <= e <= dims.n:
            raise InputError(f"element {e!r} out of range 1..{dims.n}")
        if e <= prev:
            raise InputError(f"elements must be strictly increasing, got {subset}")
        letters[e - 1] = "1"
        prev = e
    return "".join(letters)


def subset_of_word(word: str) -> tuple[int, ...]:
    """Inverse of word_of_subset: the 1-based positions carrying letter '1'."""
    _check_word(word)
    return tuple(i + 1 for i, c in enumerate(word) if c == "1")


def _check_word(word: str) -> None:
    if any(c not in "12" for c in word):
        raise InputError(f"word must be over alphabet {{1,2}}, got {word!r}")


def ones(word: str) -> int:
    return word.count("1")


def johnson_distance(x: str, y: str) -> int:
    """Graph distance on J(n,k): k minus the size of the subset overlap."""
    _check_word(x)
    _check_word(y)
    if len(x) != len(y) or ones(x) != ones(y):
        raise InputError(f"words {x!r} and {y!r} do not lie in the same Johnson graph")
    overlap = sum(1 for a, b in zip(x, y) if a == "1" and b == "1")
    return ones(x) - overlap


@lru_cache(maxsize=None)
def enumerate_points(dims: ProblemDims) -> tuple[str, ...]:
    """All C(n,k) words with k ones, lexicographic with '1' < '2'.

    This order is the coordinate order of every function vector.
    """
    return tuple(
        "".join(w) for w in product("12", repeat=dims.n) if w.count("1") == dims.k
    )


@lru_cache(maxsize=None)
def point_index(dims: ProblemDims) -> dict[str, int]:
    return {w: i for i, w in enumerate(enumerate_points(dims))}


@lru_cache(maxsize=None)
def enumerate_tails(dims: ProblemDims, i: int) -> tuple[str, ...]:
    """Tail words of length n-i that can complete a point: at most k ones,
    and few enough that the missing k - ones(w) ones fit in the first i
    letters.  Lex sorted."""
    if not 0 <= i <= dims.n:
        raise InputError(f"level must be in 0..{dims.n}, got {i}")
    out = []
    for w in product("12", repeat=dims.n - i):
        c = w.count("1")
        if c <= dims.k and dims.k - c <= i:
            out.append("".join(w))
    return tuple(out)


def admissible_shapes(i: int, r: int) -> list[int]:
    """Row-2 lengths a allowed at level i when r ones sit in the first i
    letters: a = 0..min(r, i-r)."""
    if not 0 <= r <= i:
        raise InputError(f"r must be in 0..{i}, got {r}")
    return list(range(min(r, i - r) + 1))


def shape_of_tab(tab: str) -> Shape:
    """Shape (row-1 length, row-2 length) of a rowseq."""
    return (tab.count("1"), tab.count("2"))


def is_valid_tab(tab: str) -> bool:
    """Every prefix must have at least as many 1s as 2s."""
    depth = 0
    for c in tab:
        depth += 1 if c == "1" else -1
        if depth < 0:
            return False
    return True


@lru_cache(maxsize=None)
def enumerate_tableaux(shape: Shape) -> tuple[str, ...]:
    """All standard tableaux of a two-row shape as rowseqs, lex sorted."""
    p, q = shape
    if not p >= q >= 0:
        raise InputError(f"invalid two-row shape {shape}")

    out: list[str] = []

    def extend(prefix: list[str], n1: int, n2: int) -> None:
        if n1 == p and n2 == q:
            out.append("".join(prefix))
            return
        if n1 < p:
            prefix.append("1")
            extend(prefix, n1 + 1, n2)
            prefix.pop()
        if n2 < q and n2 < n1:
            prefix.append("2")
            extend(prefix, n1, n2 + 1)
            prefix.pop()

    extend([], 0, 0)
    return tuple(out)


def count_syt(shape: Shape) -> int:
    """Number of standard tableaux of two-row shape (p,q):
    C(p+q, q) - C(p+q, q-1)."""
    p, q = shape
    if not p >= q >= 0:
        raise InputError(f"invalid two-row shape {shape}")
    m = p + q
    return comb(m, q) - (comb(m, q - 1) if q >= 1 else 0)


def box_content(tab: str, j: int) -> int:
    """Content (column - row) of box j (1-based) of a standard tableau."""
    if not 1 <= j <= len(tab):
        raise InputError(f"box {j} out of range for tableau {tab!r}")
    prefix = tab[:j]
    if tab[j - 1] == "1":
        return prefix.count("1") - 1
    return prefix.count("2") - 2


def content_sequence(tab: str) -> tuple[int, ...]:
    return tuple(box_content(tab, j) for j in range(1, len(tab) + 1))


def tab_from_contents(contents) -> str:
    """Rebuild a rowseq from its content sequence.

    Box j with content c extends row 1 when c equals the current row-1
    length, row 2 when it equals current row-2 length minus one; the two
    never coincide because p >= q throughout.
    """
    p = q = 0
    rows = []
    for c in contents:
        if c == p:
            rows.append("1")
            p += 1
        elif c == q - 1:
            rows.append("2")
            q += 1
        else:
            raise InputError(f"content sequence {tuple(contents)} is not a two-row tableau")
        if p < q:
            raise InputError(f"content sequence {tuple(contents)} is not a two-row tableau")
    return "".join(rows)


def is_admissible(label: BasisLabel, dims: ProblemDims) -> bool:
    """A label is admissible when its tail can be completed to a point and
    its shape fits the Johnson graph J(i, r) carried by that tail."""
    i = label.level
    if not 0 <= i <= dims.n:
        return False
    if len(label.tail) != dims.n - i or len(label.tab) != i:
        return False
    if any(c not in "12" for c in label.tail):
        return False
    if not is_valid_tab(label.tab):
        return False
    r = dims.k - ones(label.tail)
    if not 0 <= r <= i:
        return False
    _, a = shape_of_tab(label.tab)
    return a <= min(r, i - r)


@lru_cache(maxsize=None)
def enumerate_labels(dims: ProblemDims, level: int) -> tuple[BasisLabel, ...]:
    """Canonical order of basis level `level`: tail lex, then rowseq lex."""
    out = []
    for tail in enumerate_tails(dims, level):
        r = dims.k - ones(tail)
        tabs: list[str] = []
        for a in admissible_shapes(level, r):
            tabs.extend(enumerate_tableaux((level - a, a)))
        for tab in sorted(tabs):
            out.append(BasisLabel(level, tab, tail))
    if len(out) != dims.dim:
        raise InternalError(
            f"level {level} has {len(out)} labels, expected {dims.dim}"
        )
    return tuple(out)


@lru_cache(maxsize=None)
def _label_positions(dims: ProblemDims, level: int) -> dict[BasisLabel, int]:
    return {lab: i for i, lab in enumerate(enumerate_labels(dims, level))}


def label_index(level: int, label: BasisLabel, dims: ProblemDims) -> int:
    """Position of a label in the canonical order of its basis level."""
    if label.level != level or not is_admissible(label, dims):
        raise InputError(f"label {label} is not admissible at level {level}")
    return _label_positions(dims, level)[label]


def rs_step(state: RSState, letter: str) -> tuple[RSState, str]:
    """One row-insertion step; returns the new state and the row ('1' or
    '2') where the recording tableau grows.

    A '2' always appends to row 1.  A '1' bumps the leftmost 2 of row 1 to
    row 2 when one exists, otherwise appends to row 1.
    """
    if letter not in ("1", "2"):
        raise InputError(f"letter must be '1' or '2', got {letter!r}")
    p, q = state.shape
    if letter == "2":
        return RSState((p + 1, q), state.m), "1"
    if p - state.m > 0:
        return RSState((p, q + 1), state.m + 1), "2"
    return RSState((p + 1, q), state.m + 1), "1"


def rs_path(x: str, dims: ProblemDims) -> list[BasisLabel]:
    """Labels threaded through all levels by row-inserting x letter by
    letter: level i pairs the recording tableau of the first i letters with
    the untouched tail."""
    _check_word(x)
    if len(x) != dims.n or ones(x) != dims.k:
        raise InputError(f"word {x!r} is not a point of J({dims.n},{dims.k})")
    state = RSState((0, 0), 0)
    rows: list[str] = []
    path = [BasisLabel(0, "", x)]
    for i, letter in enumerate(x, start=1):
        state, row = rs_step(state, letter)
        rows.append(row)
        path.append(BasisLabel(i, "".join(rows), x[i:]))
    return path
