"""Sparse exact-rational matrices, just enough for majorization witnesses."""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from fractions import Fraction

from .weights import ONE, ZERO, as_weight


class Matrix:
    """Immutable ``n_rows x n_cols`` matrix stored as ``{(i, j): value}``.

    Zero entries are never stored.
    """

    __slots__ = ("n_rows", "n_cols", "entries")

    def __init__(self, n_rows: int, n_cols: int, entries: Mapping | None = None):
        self.n_rows = n_rows
        self.n_cols = n_cols
        stored = {}
        for (i, j), v in (entries or {}).items():
            if not (0 <= i < n_rows and 0 <= j < n_cols):
                raise IndexError(f"entry ({i}, {j}) outside {n_rows}x{n_cols}")
            v = as_weight(v) if not isinstance(v, Fraction) else v
            if v != 0:
                stored[(i, j)] = v
        self.entries = dict(sorted(stored.items()))

    @classmethod
    def identity(cls, n: int) -> Matrix:
        return cls(n, n, {(i, i): ONE for i in range(n)})

    @classmethod
    def zeros(cls, n_rows: int, n_cols: int | None = None) -> Matrix:
        return cls(n_rows, n_rows if n_cols is None else n_cols)

    @classmethod
    def diagonal(cls, values: Sequence) -> Matrix:
        return cls(len(values), len(values), {(i, i): v for i, v in enumerate(values)})

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> Matrix:
        n_cols = len(rows[0]) if rows else 0
        entries = {(i, j): as_weight(v) for i, row in enumerate(rows) for j, v in enumerate(row)}
        return cls(len(rows), n_cols, entries)

    @classmethod
    def from_permutation(cls, perm: Mapping, n: int) -> Matrix:
        """0/1 matrix with a one at ``(i, perm[i])``; ``perm`` may be partial."""
        return cls(n, n, {(i, j): ONE for i, j in perm.items()})

    @property
    def shape(self) -> tuple:
        return (self.n_rows, self.n_cols)

    def __getitem__(self, ij) -> Fraction:
        return self.entries.get(ij, ZERO)

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.shape == other.shape and self.entries == other.entries

    def __hash__(self):
        return hash((self.shape, frozenset(self.entries.items())))

    def __repr__(self):
        return f"Matrix({self.n_rows}x{self.n_cols}, {self.to_rows()})"

    def to_rows(self) -> list:
        return [[self[i, j] for j in range(self.n_cols)] for i in range(self.n_rows)]

    def row_sums(self) -> list:
        sums = [ZERO] * self.n_rows
        for (i, _), v in self.entries.items():
            sums[i] += v
        return sums

    def col_sums(self) -> list:
        sums = [ZERO] * self.n_cols
        for (_, j), v in self.entries.items():
            sums[j] += v
        return sums

    def transpose(self) -> Matrix:
        return Matrix(self.n_cols, self.n_rows, {(j, i): v for (i, j), v in self.entries.items()})

    def matvec(self, vec: Sequence) -> tuple:
        if len(vec) != self.n_cols:
            raise ValueError(f"vector of length {len(vec)} against {self.n_cols} columns")
        out = [ZERO] * self.n_rows
        for (i, j), v in self.entries.items():
            out[i] += v * vec[j]
        return tuple(out)

    def __matmul__(self, other: Matrix) -> Matrix:
        if self.n_cols != other.n_rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        by_row: dict = {}
        for (k, j), v in other.entries.items():
            by_row.setdefault(k, []).append((j, v))
        out: dict = {}
        for (i, k), a in self.entries.items():
            for j, b in by_row.get(k, ()):
                out[(i, j)] = out.get((i, j), ZERO) + a * b
        return Matrix(self.n_rows, other.n_cols, out)

    def __add__(self, other: Matrix) -> Matrix:
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        out = dict(self.entries)
        for ij, v in other.entries.items():
            out[ij] = out.get(ij, ZERO) + v
        return Matrix(self.n_rows, self.n_cols, out)

    def scale(self, c) -> Matrix:
        return Matrix(self.n_rows, self.n_cols, {ij: c * v for ij, v in self.entries.items()})

    def submatrix(self, n_rows: int, n_cols: int) -> Matrix:
        """Upper-left block."""
        return Matrix(n_rows, n_cols, {(i, j): v for (i, j), v in self.entries.items()
                                       if i < n_rows and j < n_cols})

    def is_nonnegative(self) -> bool:
        return all(v > 0 for v in self.entries.values())

    def is_doubly_substochastic(self) -> bool:
        return (self.is_nonnegative()
                and all(s <= 1 for s in self.row_sums())
                and all(s <= 1 for s in self.col_sums()))

    def is_doubly_stochastic(self) -> bool:
        return (self.n_rows == self.n_cols and self.is_nonnegative()
                and all(s == 1 for s in self.row_sums())
                and all(s == 1 for s in self.col_sums()))
