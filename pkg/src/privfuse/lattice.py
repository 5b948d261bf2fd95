"""Consistency of sets of source elements, consistency classes, meets, joins and fusion.

A set ``B`` is consistent when any strict preference expressed by one member
is weakly respected by all members. Consistent sets admit a common ordering,
and along it the majorization join and meet are the pointwise max and min of
prefix sums. Inconsistent sets are first flattened on their consistency
classes (the strongly connected components of the union of all strict
preferences), which makes them consistent; fusion is the join of the
flattened set.
"""

from __future__ import annotations

from collections import deque
from collections.abc import Sequence
from dataclasses import dataclass

from .errors import InconsistentSet, NotCommonOrdering
from .weights import (
    ZERO,
    Ordering,
    SourceElement,
    differential,
    integral,
    is_ordering,
    pad,
    unapply_ordering,
)


def universe(B: Sequence[SourceElement]) -> list:
    """Union of supports, sorted."""
    labels = set()
    for beta in B:
        labels |= beta.support
    return sorted(labels)


def strict_edges(B: Sequence[SourceElement]) -> dict:
    """``{(u, v): i}`` for every strict preference ``B[i](u) < B[i](v)``.

    ``i`` is the first member expressing it.
    """
    labels = universe(B)
    edges = {}
    for idx, beta in enumerate(B):
        for u in labels:
            for v in labels:
                if beta[u] < beta[v] and (u, v) not in edges:
                    edges[(u, v)] = idx
    return edges


def is_consistent(B: Sequence[SourceElement]) -> bool:
    """Does every strict preference in one member hold weakly in all members?"""
    labels = universe(B)
    for u in labels:
        for v in labels:
            if any(beta[u] < beta[v] for beta in B) and any(d[u] > d[v] for d in B):
                return False
    return True


def find_cycle(B: Sequence[SourceElement]) -> tuple | None:
    """A shortest strict-preference cycle, or None when ``B`` is consistent.

    The result is a tuple of ``(label, member_index)`` steps: each label is
    strictly below the next one according to member ``member_index``, and
    the last label wraps around to the first.
    """
    edges = strict_edges(B)
    succ: dict = {}
    for (u, v) in sorted(edges):
        succ.setdefault(u, []).append(v)
    best = None
    for start in sorted(succ):
        # BFS for the shortest path start -> ... -> start
        parent = {start: None}
        queue = deque([start])
        found = None
        while queue and found is None:
            u = queue.popleft()
            for v in succ.get(u, ()):
                if v == start:
                    found = u
                    break
                if v not in parent:
                    parent[v] = u
                    queue.append(v)
        if found is None:
            continue
        path = [found]
        while parent[path[-1]] is not None:
            path.append(parent[path[-1]])
        path.reverse()
        if best is None or len(path) < len(best):
            best = path
    if best is None:
        return None
    return tuple((u, edges[(u, best[(k + 1) % len(best)])]) for k, u in enumerate(best))


def format_cycle(cycle, names: Sequence[str] | None = None) -> str:
    """``w◁x◁w`` style rendering; with ``names`` each ◁ carries its member."""
    if not cycle:
        return ""
    out = []
    for label, idx in cycle:
        out.append(label)
        out.append(f"◁[{names[idx]}]" if names else "◁")
    out.append(cycle[0][0])
    return "".join(out)


# -- merged weak preference ----------------------------------------------------

def _sccs(nodes: Sequence, succ: dict) -> list:
    """Tarjan's algorithm, iterative. Returns components as lists."""
    index: dict = {}
    low: dict = {}
    on_stack = set()
    stack: list = []
    comps = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ.get(root, ())))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for nxt in it:
                if nxt not in index:
                    index[nxt] = low[nxt] = counter
                    counter += 1
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, iter(succ.get(nxt, ()))))
                    advanced = True
                    break
                if nxt in on_stack:
                    low[node] = min(low[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    x = stack.pop()
                    on_stack.discard(x)
                    comp.append(x)
                    if x == node:
                        break
                comps.append(comp)
    return comps


@dataclass(frozen=True)
class MergedPreference:
    """Transitive closure of the members' weak preferences.

    ``classes`` lists the equivalence classes of the closure, lowest first.
    """

    classes: tuple

    def class_index(self, label) -> int | None:
        for i, c in enumerate(self.classes):
            if label in c:
                return i
        return None

    def leq(self, u, v) -> bool:
        return self.class_index(u) <= self.class_index(v)

    def equivalent(self, u, v) -> bool:
        return self.class_index(u) == self.class_index(v)

    def describe(self) -> str:
        return "◁".join(_fmt_block(c) for c in self.classes)


def merged_preference(B: Sequence[SourceElement]) -> MergedPreference:
    labels = universe(B)
    succ = {u: [v for v in labels if any(beta[u] <= beta[v] for beta in B)] for u in labels}
    comps = [frozenset(c) for c in _sccs(labels, succ)]
    # Every pair is weakly comparable in each member, so the condensation is
    # a chain; a class is lower when it reaches more of the others.
    reach = {c: sum(1 for d in comps if any(v in d for u in c for v in succ[u])) for c in comps}
    return MergedPreference(tuple(sorted(comps, key=lambda c: (-reach[c], min(c)))))


# -- consistency classes -------------------------------------------------------

def _fmt_block(block) -> str:
    return "{" + ",".join(sorted(block)) + "}"


@dataclass(frozen=True)
class ConsistencyPartition:
    """Consistency classes of a set, in ascending block order.

    ``ties[i]`` is True when no member strictly separates ``blocks[i]`` from
    ``blocks[i + 1]``. Labels outside every support form an implicit zero
    block that is not listed.
    """

    blocks: tuple
    ties: tuple

    def block_of(self, label) -> frozenset | None:
        for b in self.blocks:
            if label in b:
                return b
        return None

    @property
    def tiers(self) -> tuple:
        """Runs of tied blocks merged, lowest first.

        Inside a tier every member is constant, so for a single source the
        tiers are exactly its indifference classes.
        """
        out = []
        for i, b in enumerate(self.blocks):
            if i and self.ties[i - 1]:
                out[-1] = out[-1] | b
            else:
                out.append(b)
        return tuple(out)

    def describe(self) -> str:
        if not self.blocks:
            return "(empty)"
        out = [_fmt_block(self.blocks[0])]
        for tie, b in zip(self.ties, self.blocks[1:]):
            out.append("~" if tie else "<")
            out.append(_fmt_block(b))
        return "".join(out)


def consistency_classes(B: Sequence[SourceElement]) -> ConsistencyPartition:
    """Strongly connected components of the strict-preference digraph.

    Blocks are listed lowest first. Among blocks that are free to go next the
    one with the smallest label is placed highest, so the descending
    enumeration of a single member breaks ties alphabetically, like
    :func:`~privfuse.weights.canonical_ordering`.
    """
    labels = universe(B)
    edges = strict_edges(B)
    succ: dict = {u: [] for u in labels}
    for (u, v) in edges:
        succ[u].append(v)
    comps = [frozenset(c) for c in _sccs(labels, succ)]
    comp_of = {u: c for c in comps for u in c}
    above = {c: set() for c in comps}
    for (u, v) in edges:
        if comp_of[u] != comp_of[v]:
            above[comp_of[u]].add(comp_of[v])
    placed: set = set()
    descending_blocks = []
    while len(descending_blocks) < len(comps):
        ready = [c for c in comps if c not in placed and above[c] <= placed]
        nxt = min(ready, key=min)
        placed.add(nxt)
        descending_blocks.append(nxt)
    ascending = list(reversed(descending_blocks))
    # group adjacent blocks no member separates; list each group by label
    runs: list = []
    for i, b in enumerate(ascending):
        lo = ascending[i - 1] if i else None
        if lo is not None and not any(comp_of[u] in (lo, b) and comp_of[v] in (lo, b)
                                       for (u, v) in edges):
            runs[-1].append(b)
        else:
            runs.append([b])
    blocks = tuple(b for run in runs for b in sorted(run, key=min))
    ties = tuple(k > 0 for run in runs for k in range(len(run)))[1:]
    return ConsistencyPartition(blocks, ties)


def common_ordering(B: Sequence[SourceElement]) -> Ordering | None:
    """An enumeration of the union of supports descending for every member, or None.

    Tiers are taken highest first; labels inside a tier alphabetically.
    """
    if not is_consistent(B):
        return None
    part = consistency_classes(B)
    labels = [u for tier in reversed(part.tiers) for u in sorted(tier)]
    return Ordering(tuple(labels))


def impose_consistency(B: Sequence[SourceElement]) -> list:
    """Flatten each member to its minimum over every consistency class.

    The result is consistent and each flattened member is majorized by the
    original; it is the greatest such source constant on the classes.
    """
    part = consistency_classes(B)
    hats = []
    for beta in B:
        entries = {}
        for block in part.blocks:
            low = min(beta[u] for u in block)
            for u in block:
                entries[u] = low
        hats.append(SourceElement(entries))
    return hats


# -- meets and joins -----------------------------------------------------------

def _check_common(B, theta):
    if not B:
        raise ValueError("meet and join need a nonempty set")
    for beta in B:
        if not is_ordering(theta, beta):
            raise NotCommonOrdering(f"{theta.labels} does not order {beta!r}")


def concave_majorant(curve: Sequence) -> tuple:
    """Least concave majorant of ``(0, 0), (1, curve[0]), ...`` sampled at 1..n.

    A pointwise max of prefix-sum curves can bend upwards, in which case its
    differential is not descending; the hull is the least curve above it
    whose differential is.
    """
    pts = [(0, ZERO)] + [(k + 1, v) for k, v in enumerate(curve)]
    hull: list = []
    for p in pts:
        # drop the middle point while it lies on or below the chord
        while len(hull) >= 2:
            (x0, y0), (x1, y1) = hull[-2], hull[-1]
            if (y1 - y0) * (p[0] - x0) <= (p[1] - y0) * (x1 - x0):
                hull.pop()
            else:
                break
        hull.append(p)
    out = []
    for (x0, y0), (x1, y1) in zip(hull, hull[1:]):
        slope = (y1 - y0) / (x1 - x0)
        out.extend(y0 + slope * (x - x0) for x in range(x0 + 1, x1 + 1))
    return tuple(out)


def _combine(B, theta, pick):
    curves = [integral([beta[y] for y in theta.labels]) for beta in B]
    envelope = [pick(vals) for vals in zip(*curves)]
    if pick is max:
        envelope = concave_majorant(envelope)
    return unapply_ordering(differential(envelope), theta)


def join_ordered(B: Sequence[SourceElement], theta: Ordering) -> SourceElement:
    """Majorization join along a common ordering.

    Pointwise max of prefix sums, replaced by its least concave majorant when
    the max is not concave, so the result still descends along ``theta``.
    """
    _check_common(B, theta)
    return _combine(B, theta, max)


def meet_ordered(B: Sequence[SourceElement], theta: Ordering) -> SourceElement:
    """Majorization meet along a common ordering: pointwise min of prefix sums."""
    _check_common(B, theta)
    return _combine(B, theta, min)


def _envelope_sorted(seqs, pick) -> tuple:
    seqs = [tuple(s) for s in seqs]
    if not seqs:
        raise ValueError("meet and join need a nonempty set")
    n = max(len(s) for s in seqs)
    curves = [integral(pad(s, n)) for s in seqs]
    envelope = [pick(vals) for vals in zip(*curves)]
    if pick is max:
        envelope = concave_majorant(envelope)
    return differential(envelope)


def join_sorted(seqs) -> tuple:
    """Join of descending sequences (label-free form)."""
    return _envelope_sorted(seqs, max)


def meet_sorted(seqs) -> tuple:
    """Meet of descending sequences (label-free form)."""
    return _envelope_sorted(seqs, min)


def join(B: Sequence[SourceElement]) -> SourceElement:
    """Join of a consistent set.

    Raises:
        InconsistentSet: carrying a witnessing cycle, when no common ordering exists.
    """
    theta = common_ordering(B)
    if theta is None:
        raise InconsistentSet("set is inconsistent; use fusion()", cycle=find_cycle(B))
    return join_ordered(B, theta)


def meet(B: Sequence[SourceElement]) -> SourceElement:
    """Majorization meet of any finite nonempty set (computed on the flattened set)."""
    hats = impose_consistency(B)
    return meet_ordered(hats, common_ordering(hats))


def fusion(B: Sequence[SourceElement]) -> SourceElement:
    """Join of the flattened set: keeps what the members agree on."""
    hats = impose_consistency(B)
    return join_ordered(hats, common_ordering(hats))


def fold_fusion(B: Sequence[SourceElement]) -> SourceElement:
    """Left-to-right pairwise fusion, for comparing against :func:`fusion`.

    Fusion is not known to be associative, so the two may differ.
    """
    if not B:
        raise ValueError("fusion needs a nonempty set")
    acc = B[0]
    for beta in B[1:]:
        acc = fusion([acc, beta])
    return acc


__all__ = [
    "ConsistencyPartition", "MergedPreference", "ZERO",
    "common_ordering", "concave_majorant", "consistency_classes", "find_cycle", "fold_fusion",
    "format_cycle", "fusion", "impose_consistency", "is_consistent", "join",
    "join_ordered", "join_sorted", "meet", "meet_ordered", "meet_sorted",
    "merged_preference", "strict_edges", "universe",
]
