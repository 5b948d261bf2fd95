"""The majorization preorder on source elements, with constructive witnesses.

``beta`` is majorized by ``gamma`` when every prefix sum of beta's sorted
weights is at most the matching prefix sum of gamma's. Equivalently there is
a doubly substochastic ``D`` with ``sorted(beta) = D @ sorted(gamma)``, and
equivalently ``D`` is a sub-convex combination of partial permutations. This
module builds all three and checks them against each other.

All matrix work happens on zero-padded descending vectors of length
``n = max(#beta, #gamma)``; :func:`label_witness` carries a witness back to
the original labels.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction

from .errors import NoPerfectMatching, NotMajorized, NotSubstochastic
from .matrix import Matrix
from .weights import ONE, ZERO, SourceElement, canonical_ordering, descending, integral


def _dims(beta: SourceElement, gamma: SourceElement) -> int:
    return max(beta.size, gamma.size)


def is_majorized(beta: SourceElement, gamma: SourceElement) -> bool:
    """Prefix-sum test: is ``beta`` majorized by ``gamma``?

    No equality of totals is required (this is the "weak" variant).
    """
    n = _dims(beta, gamma)
    lo = integral(descending(beta, n))
    hi = integral(descending(gamma, n))
    return all(a <= b for a, b in zip(lo, hi))


# -- (c) => (a): T-transformations ---------------------------------------------

def _transfer_pair(target, cur):
    """Pick the coordinates ``(j, k)`` for the next T-transformation.

    Preferred choice: ``j`` the last index where target < cur, ``k`` the first
    index after ``j`` where target > cur. When no such ``k`` exists but some
    coordinate still has target > cur, take that first ``k`` and the last
    ``j < k`` with target < cur instead. Returns ``None`` once target <= cur
    componentwise.
    """
    n = len(target)
    below = [i for i in range(n) if target[i] < cur[i]]
    if below:
        j = below[-1]
        for k in range(j + 1, n):
            if target[k] > cur[k]:
                return j, k
    above = [i for i in range(n) if target[i] > cur[i]]
    if not above:
        return None
    k = above[0]
    j = max(i for i in below if i < k)
    return j, k


def _t_transform(n: int, j: int, k: int, lam: Fraction) -> Matrix:
    entries = {(i, i): ONE for i in range(n) if i not in (j, k)}
    entries[(j, j)] = entries[(k, k)] = lam
    entries[(j, k)] = entries[(k, j)] = ONE - lam
    return Matrix(n, n, entries)


def substochastic_witness(beta: SourceElement, gamma: SourceElement) -> Matrix:
    """Doubly substochastic ``D`` with ``descending(beta) = D @ descending(gamma)``.

    Built as a diagonal scaling applied after at most ``n`` T-transformations
    ``lam*I + (1-lam)*swap(j, k)``, each of which makes one more coordinate
    of the running vector agree with the target.

    Raises:
        NotMajorized: if ``beta`` is not majorized by ``gamma``.
    """
    if not is_majorized(beta, gamma):
        raise NotMajorized(f"{beta!r} is not majorized by {gamma!r}")
    n = _dims(beta, gamma)
    target = descending(beta, n)
    cur = list(descending(gamma, n))
    D = Matrix.identity(n)
    steps = 0
    while (pair := _transfer_pair(target, cur)) is not None:
        j, k = pair
        steps += 1
        assert steps <= n, "T-transformation bound exceeded"
        moved = min(cur[j] - target[j], target[k] - cur[k])
        lam = ONE - moved / (cur[j] - cur[k])
        cur[j] -= moved
        cur[k] += moved
        D = _t_transform(n, j, k, lam) @ D
    scale = [ONE if t == c else t / c for t, c in zip(target, cur)]
    return Matrix.diagonal(scale) @ D


def verify_witness(D: Matrix, beta: SourceElement, gamma: SourceElement) -> bool:
    """Check that ``D`` is doubly substochastic and maps sorted gamma to sorted beta."""
    n = D.n_rows
    if D.n_cols != n or n < _dims(beta, gamma):
        return False
    if not D.is_doubly_substochastic() or any(v > 1 for v in D.entries.values()):
        return False
    return D.matvec(descending(gamma, n)) == descending(beta, n)


def label_witness(D: Matrix, beta: SourceElement, gamma: SourceElement) -> dict:
    """Re-index a sorted-coordinate witness by labels.

    Rows follow the canonical ordering of ``beta`` and columns that of
    ``gamma``; the result ``W`` satisfies ``beta(u) = sum_v W[u, v] * gamma(v)``.
    Padding rows and columns carry no label and are dropped (they only ever
    meet zero weights).
    """
    rows = canonical_ordering(beta).labels
    cols = canonical_ordering(gamma).labels
    return {(rows[i], cols[j]): v for (i, j), v in D.entries.items()
            if i < len(rows) and j < len(cols)}


# -- (a) => (b): dilation and Birkhoff ---------------------------------------

def dilate_to_doubly_stochastic(D: Matrix) -> Matrix:
    """Embed an ``n x n`` doubly substochastic matrix in a ``2n x 2n`` doubly stochastic one.

    The block layout is ``[[D, I - diag(row sums)], [I - diag(col sums), D^T]]``.
    """
    n = D.n_rows
    if D.n_cols != n or not D.is_doubly_substochastic():
        raise NotSubstochastic("dilation needs a square doubly substochastic matrix")
    entries = dict(D.entries)
    for (i, j), v in D.entries.items():
        entries[(n + j, n + i)] = v
    for i, s in enumerate(D.row_sums()):
        entries[(i, n + i)] = ONE - s
    for j, s in enumerate(D.col_sums()):
        entries[(n + j, j)] = ONE - s
    return Matrix(2 * n, 2 * n, entries)


@dataclass(frozen=True)
class Term:
    weight: Fraction
    perm: tuple  # sorted (row, col) pairs of a (partial) permutation

    @property
    def mapping(self) -> dict:
        return dict(self.perm)


@dataclass(frozen=True)
class ConvexDecomposition:
    """``sum(weight_i * P_i)`` for (partial) permutation matrices ``P_i`` of size ``n``."""

    n: int
    terms: tuple

    @property
    def total_weight(self) -> Fraction:
        return sum((t.weight for t in self.terms), ZERO)

    def __len__(self):
        return len(self.terms)

    def matrix(self) -> Matrix:
        out: dict = {}
        for t in self.terms:
            for ij in t.perm:
                out[ij] = out.get(ij, ZERO) + t.weight
        return Matrix(self.n, self.n, out)

    def apply(self, vec) -> tuple:
        """``sum_i weight_i * (P_i @ vec)``."""
        out = [ZERO] * self.n
        for t in self.terms:
            for i, j in t.perm:
                out[i] += t.weight * vec[j]
        return tuple(out)


def _perfect_matching(n: int, adj: list) -> dict | None:
    """Row -> column perfect matching by augmenting paths, or None."""
    match_col: dict = {}

    def augment(row, seen):
        for col in adj[row]:
            if col in seen:
                continue
            seen.add(col)
            if col not in match_col or augment(match_col[col], seen):
                match_col[col] = row
                return True
        return False

    for row in range(n):
        if not augment(row, set()):
            return None
    return {row: col for col, row in match_col.items()}


def _is_dilation(S: Matrix) -> bool:
    if S.n_rows % 2:
        return False
    m = S.n_rows // 2
    for (i, j), v in S.entries.items():
        if i < m and j >= m and j != m + i:
            return False
        if i >= m and j < m and i != m + j:
            return False
        if i >= m and j >= m and S[j - m, i - m] != v:
            return False
    return all(S[m + j, m + i] == v for (i, j), v in S.entries.items() if i < m and j < m)


def _symmetrize(matching: dict, m: int) -> dict:
    """Turn any perfect matching of a dilation into one of dilation shape.

    The upper-left part ``R`` of the matching is a partial permutation;
    uncovered rows and columns are matched through the diagonal deficiency
    blocks and ``R^T`` fills the lower-right block.
    """
    R = {i: j for i, j in matching.items() if i < m and j < m}
    out = dict(R)
    covered_cols = set(R.values())
    for i in range(m):
        if i not in R:
            out[i] = m + i
    for j in range(m):
        if j not in covered_cols:
            out[m + j] = j
    for i, j in R.items():
        out[m + j] = m + i
    return out


def birkhoff_decompose(S: Matrix) -> ConvexDecomposition:
    """Write a doubly stochastic matrix as a convex combination of permutations.

    Repeatedly finds a perfect matching on the positive entries and peels
    off the smallest matched entry. When ``S`` has the block shape produced
    by :func:`dilate_to_doubly_stochastic`, matchings are forced into that
    shape as well, so mirrored entries vanish together and at most
    ``m^2 + 2m`` terms appear for a ``2m x 2m`` input.

    Raises:
        NoPerfectMatching: if ``S`` is not doubly stochastic.
    """
    n = S.n_rows
    if not S.is_doubly_stochastic():
        raise NoPerfectMatching("input is not doubly stochastic; no Birkhoff decomposition")
    structured = _is_dilation(S)
    residual = dict(S.entries)
    terms = []
    while residual:
        adj = [[] for _ in range(n)]
        for (i, j) in residual:
            adj[i].append(j)
        matching = _perfect_matching(n, adj)
        if matching is None:
            raise NoPerfectMatching("positive entries admit no perfect matching")
        if structured:
            matching = _symmetrize(matching, n // 2)
        lam = min(residual[(i, j)] for i, j in matching.items())
        for ij in matching.items():
            left = residual[ij] - lam
            if left:
                residual[ij] = left
            else:
                del residual[ij]
        terms.append(Term(lam, tuple(sorted(matching.items()))))
    decomp = ConvexDecomposition(n, tuple(terms))
    assert decomp.total_weight == 1
    return decomp


def partial_permutation_decomposition(beta: SourceElement, gamma: SourceElement) -> ConvexDecomposition:
    """Partial permutations ``P_i`` and weights with ``sum w_i P_i sorted(gamma) = sorted(beta)``.

    The witness ``D`` is dilated, decomposed, and each ``2n x 2n`` permutation
    is cut back to its upper-left ``n x n`` block. Equal blocks are merged
    and empty ones dropped, so the weights sum to at most one.
    """
    D = substochastic_witness(beta, gamma)
    n = D.n_rows
    if n == 0:
        return ConvexDecomposition(0, ())
    full = birkhoff_decompose(dilate_to_doubly_stochastic(D))
    merged: dict = {}
    for t in full.terms:
        part = tuple((i, j) for i, j in t.perm if i < n and j < n)
        if part:
            merged[part] = merged.get(part, ZERO) + t.weight
    terms = sorted((Term(w, p) for p, w in merged.items()), key=lambda t: (-t.weight, t.perm))
    return ConvexDecomposition(n, tuple(terms))


def cycle_notation(perm: Mapping) -> str:
    """Render a (partial) permutation ``i -> perm[i]``.

    Cycles print as ``(a b c)`` meaning a->b->c->a, fixed points included;
    open chains of a partial map print as ``[a b c]`` meaning a->b->c with
    ``c`` unmapped. The empty map prints as ``()``.
    """
    if not perm:
        return "()"
    image = set(perm.values())
    seen = set()
    parts = []
    for start in sorted(set(perm) | image):
        if start in seen or start in image:
            continue
        chain = [start]
        seen.add(start)
        while chain[-1] in perm:
            chain.append(perm[chain[-1]])
            seen.add(chain[-1])
        parts.append((start, "[" + " ".join(map(str, chain)) + "]"))
    for start in sorted(perm):
        if start in seen:
            continue
        cyc = [start]
        seen.add(start)
        nxt = perm[start]
        while nxt != start:
            cyc.append(nxt)
            seen.add(nxt)
            nxt = perm[nxt]
        parts.append((start, "(" + " ".join(map(str, cyc)) + ")"))
    return "".join(p for _, p in sorted(parts))
