"""Base matrices for protograph ensembles: block, terminated (J,2J)-regular, and TARJA.

Indexing convention: rows, columns, and puncture indices are 0-based
everywhere.  The TARJA family punctures the variable node of column
index 2, i.e. the third column of the 3x5 component submatrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np


class ProtographError(ValueError):
    """Invalid construction parameters or malformed serialized data."""


def _as_entry_matrix(entries) -> np.ndarray:
    m = np.asarray(entries, dtype=np.int64)
    if m.ndim != 2 or m.size == 0:
        raise ProtographError("base matrix must be a non-empty 2-D integer array")
    if (m < 0).any():
        raise ProtographError("base matrix entries must be non-negative")
    return m


@dataclass(frozen=True)
class BaseMatrix:
    """Integer edge-multiplicity matrix; rows are check node types, columns
    are variable node types.  ``punctured`` holds column indices of variable
    nodes that are not transmitted.

    All-zero columns are rejected (an isolated variable type is meaningless).
    All-zero rows are allowed: terminated TARJA matrices contain one vacuous
    check row by construction, and it is kept in the row count used by the
    nominal rate formula.
    """

    entries: np.ndarray
    punctured: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        m = _as_entry_matrix(self.entries)
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)
        if (m.sum(axis=0) == 0).any():
            raise ProtographError("base matrix has an all-zero column")
        punctured = frozenset(int(j) for j in self.punctured)
        object.__setattr__(self, "punctured", punctured)
        if any(j < 0 or j >= self.n_v for j in punctured):
            raise ProtographError("punctured column index out of range")
        if len(punctured) >= self.n_v:
            raise ProtographError("at least one column must be transmitted")

    @property
    def n_c(self) -> int:
        return self.entries.shape[0]

    @property
    def n_v(self) -> int:
        return self.entries.shape[1]

    @property
    def n_transmitted(self) -> int:
        return self.n_v - len(self.punctured)

    def transmitted_columns(self) -> np.ndarray:
        return np.array([j for j in range(self.n_v) if j not in self.punctured])

    def __eq__(self, other):
        if not isinstance(other, BaseMatrix):
            return NotImplemented
        return (
            self.entries.shape == other.entries.shape
            and (self.entries == other.entries).all()
            and self.punctured == other.punctured
        )

    def __hash__(self):
        return hash((self.entries.tobytes(), self.entries.shape, self.punctured))


@dataclass(frozen=True)
class EnsembleSpec:
    """Component submatrices B_0..B_{m_s} of a terminated convolutional
    ensemble, all of size b_c x b_v, plus the termination factor L and the
    per-position punctured column indices (within 0..b_v-1)."""

    components: tuple
    L: int
    punctured_cols: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        comps = tuple(_as_entry_matrix(c) for c in self.components)
        if not comps:
            raise ProtographError("need at least one component submatrix")
        shape = comps[0].shape
        if any(c.shape != shape for c in comps):
            raise ProtographError("component submatrices must share dimensions")
        for c in comps:
            c.setflags(write=False)
        object.__setattr__(self, "components", comps)
        if self.L < 1:
            raise ProtographError("termination factor L must be >= 1")
        pc = frozenset(int(j) for j in self.punctured_cols)
        if any(j < 0 or j >= shape[1] for j in pc):
            raise ProtographError("punctured column index out of range")
        object.__setattr__(self, "punctured_cols", pc)

    @property
    def m_s(self) -> int:
        return len(self.components) - 1

    @property
    def b_c(self) -> int:
        return self.components[0].shape[0]

    @property
    def b_v(self) -> int:
        return self.components[0].shape[1]


def regular_components(J: int) -> tuple:
    """J copies of the 1x2 all-ones component; stacked sum is [J J], the
    (J,2J)-regular block base matrix.  Coupling memory is m_s = J - 1."""
    if J < 2:
        raise ProtographError("J must be >= 2")
    return tuple(np.ones((1, 2), dtype=np.int64) for _ in range(J))


_TARJA_B0 = np.array(
    [
        [1, 2, 0, 0, 0],
        [0, 1, 1, 1, 0],
        [0, 0, 1, 0, 2],
    ],
    dtype=np.int64,
)

_TARJA_B1 = np.array(
    [
        [0, 0, 0, 0, 0],
        [0, 2, 0, 0, 1],
        [0, 1, 1, 1, 0],
    ],
    dtype=np.int64,
)

TARJA_PUNCTURED_COLUMN = 2


def tarja_components() -> tuple:
    """The two 3x5 TARJA component submatrices (coupling memory 1).  Their
    sum is the ARJA block base matrix; column 2 is punctured."""
    return (_TARJA_B0.copy(), _TARJA_B1.copy())


def regular_ensemble(J: int, L: int) -> EnsembleSpec:
    return EnsembleSpec(components=regular_components(J), L=L)


def tarja_ensemble(L: int) -> EnsembleSpec:
    return EnsembleSpec(
        components=tarja_components(),
        L=L,
        punctured_cols=frozenset({TARJA_PUNCTURED_COLUMN}),
    )


def terminate(spec: EnsembleSpec) -> BaseMatrix:
    """Staircase placement: block column j (0 <= j < L) holds B_i at block
    row j+i.  Output is (L+m_s)*b_c x L*b_v; the punctured set is the union
    of the per-position punctured columns shifted by j*b_v."""
    L, ms, bc, bv = spec.L, spec.m_s, spec.b_c, spec.b_v
    out = np.zeros(((L + ms) * bc, L * bv), dtype=np.int64)
    for j in range(L):
        for i, comp in enumerate(spec.components):
            r = (j + i) * bc
            out[r : r + bc, j * bv : (j + 1) * bv] += comp
    punctured = frozenset(j * bv + p for j in range(L) for p in spec.punctured_cols)
    return BaseMatrix(entries=out, punctured=punctured)


@dataclass(frozen=True)
class DesignRate:
    """Nominal rate (n_v - n_c) / (n_v - |punctured|) as an exact rational.
    ``assumed_full_rank`` records that no rank computation was performed;
    ``nonpositive`` warns that the nominal rate is <= 0 (degenerate but
    allowed, e.g. terminated TARJA at L = 1)."""

    rate: Fraction
    assumed_full_rank: bool
    nonpositive: bool


def design_rate(base: BaseMatrix) -> DesignRate:
    denom = base.n_transmitted
    if denom < 1:
        raise ProtographError("all columns punctured")
    rate = Fraction(base.n_v - base.n_c, denom)
    return DesignRate(rate=rate, assumed_full_rank=True, nonpositive=rate <= 0)


@dataclass(frozen=True)
class DegreeProfile:
    variable_degrees: np.ndarray  # column sums q_v
    check_degrees: np.ndarray  # row sums d_c


def degree_profile(base: BaseMatrix) -> DegreeProfile:
    q = base.entries.sum(axis=0)
    d = base.entries.sum(axis=1)
    assert q.sum() == d.sum()  # edge-count conservation
    return DegreeProfile(variable_degrees=q, check_degrees=d)


# --- plain-text serialization ------------------------------------------------
#
# Line 1: "n_c n_v"; then n_c rows of n_v space-separated integers; then
# "punctured:" optionally followed by space-separated ascending indices.
# Single spaces, every line newline-terminated.


def write_base_matrix_text(base: BaseMatrix) -> str:
    lines = [f"{base.n_c} {base.n_v}"]
    for row in base.entries:
        lines.append(" ".join(str(int(x)) for x in row))
    punct = " ".join(str(j) for j in sorted(base.punctured))
    lines.append("punctured:" + (" " + punct if punct else ""))
    return "\n".join(lines) + "\n"


def read_base_matrix_text(text: str) -> BaseMatrix:
    lines = text.splitlines()
    if not lines:
        raise ProtographError("empty base matrix file")
    head = lines[0].split()
    if len(head) != 2:
        raise ProtographError("header must be 'n_c n_v'")
    try:
        n_c, n_v = int(head[0]), int(head[1])
    except ValueError as e:
        raise ProtographError("non-integer header") from e
    if len(lines) < n_c + 2:
        raise ProtographError("truncated base matrix file")
    rows = []
    for k in range(n_c):
        parts = lines[1 + k].split()
        if len(parts) != n_v:
            raise ProtographError(f"row {k} has {len(parts)} entries, expected {n_v}")
        try:
            rows.append([int(x) for x in parts])
        except ValueError as e:
            raise ProtographError(f"non-integer entry in row {k}") from e
    pline = lines[1 + n_c]
    if not pline.startswith("punctured:"):
        raise ProtographError("missing 'punctured:' line")
    try:
        punct = frozenset(int(x) for x in pline[len("punctured:") :].split())
    except ValueError as e:
        raise ProtographError("non-integer puncture index") from e
    return BaseMatrix(entries=np.array(rows, dtype=np.int64), punctured=punct)
