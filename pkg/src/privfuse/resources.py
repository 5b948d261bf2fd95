"""Resources: finitely supported maps from input labels to source elements.

A resource ``phi`` sends an input ``x`` to a source element ``phi[x]`` over
outputs; inputs outside the support map to the empty source. Resources
compose like substochastic matrices, and the lattice operations on source
elements lift to resources pointwise.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence

from . import lattice
from .majorization import is_majorized
from .weights import EMPTY, ONE, ZERO, SourceElement, as_weight, point_mass


class Resource(Mapping):
    """Immutable ``{input: SourceElement}``; empty rows are dropped."""

    __slots__ = ("_rows", "_hash")

    def __init__(self, rows: Mapping | Iterable = ()):
        items = rows.items() if isinstance(rows, Mapping) else rows
        stored = {}
        for x, beta in items:
            x = str(x)
            if x in stored:
                raise ValueError(f"input {x!r} given twice")
            if not isinstance(beta, SourceElement):
                beta = SourceElement(beta)
            stored[x] = beta
        self._rows = {x: stored[x] for x in sorted(stored) if not stored[x].is_empty()}
        self._hash = None

    def __getitem__(self, x) -> SourceElement:
        return self._rows.get(x, EMPTY)

    def __call__(self, x) -> SourceElement:
        return self._rows.get(x, EMPTY)

    def __iter__(self):
        return iter(self._rows)

    def __len__(self):
        return len(self._rows)

    def __contains__(self, x):
        return x in self._rows

    def __eq__(self, other):
        if isinstance(other, Resource):
            return self._rows == other._rows
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._rows.items()))
        return self._hash

    def __repr__(self):
        body = "; ".join(f"{x} -> {dict(b)}" for x, b in self._rows.items())
        return f"Resource({body})"

    @property
    def support(self) -> frozenset:
        return frozenset(self._rows)

    @property
    def outputs(self) -> frozenset:
        out = set()
        for beta in self._rows.values():
            out |= beta.support
        return frozenset(out)

    @property
    def size(self) -> int:
        return len(self._rows)

    @property
    def total_size(self) -> int:
        """Sum of the row supports' sizes."""
        return sum(b.size for b in self._rows.values())

    def is_deterministic(self) -> bool:
        """Every row a point mass of weight one."""
        return all(b.size == 1 and b.total == 1 for b in self._rows.values())


EMPTY_RESOURCE = Resource()


def identity_resource(labels: Iterable) -> Resource:
    return Resource({x: point_mass(x) for x in labels})


def from_table(table: Mapping) -> Resource:
    """``{x: {y: weight}}`` with weights as anything :func:`as_weight` takes."""
    return Resource({x: SourceElement({y: as_weight(w) for y, w in row.items()})
                     for x, row in table.items()})


def bsc(p) -> Resource:
    """Binary symmetric channel on ``"0"``/``"1"`` flipping with probability ``p``."""
    p = as_weight(p)
    if not 0 <= p <= 1:
        raise ValueError("crossover probability outside [0, 1]")
    return from_table({"0": {"0": ONE - p, "1": p}, "1": {"0": p, "1": ONE - p}})


class PartialMap(Mapping):
    """A finite partial function between labels."""

    __slots__ = ("_m",)

    def __init__(self, pairs: Mapping | Iterable = ()):
        items = pairs.items() if isinstance(pairs, Mapping) else pairs
        m = {}
        for a, b in items:
            a, b = str(a), str(b)
            if a in m and m[a] != b:
                raise ValueError(f"{a!r} mapped twice")
            m[a] = b
        self._m = dict(sorted(m.items()))

    def __getitem__(self, a):
        return self._m[a]

    def __iter__(self):
        return iter(self._m)

    def __len__(self):
        return len(self._m)

    def __eq__(self, other):
        if isinstance(other, PartialMap):
            return self._m == other._m
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._m.items()))

    def __repr__(self):
        return f"PartialMap({self._m})"

    @property
    def domain(self) -> frozenset:
        return frozenset(self._m)

    @property
    def image(self) -> frozenset:
        return frozenset(self._m.values())

    def then(self, other: PartialMap) -> PartialMap:
        """``other`` after ``self``."""
        return PartialMap({a: other[b] for a, b in self._m.items() if b in other})

    def as_resource(self) -> Resource:
        return Resource({a: point_mass(b) for a, b in self._m.items()})

    @classmethod
    def identity(cls, labels: Iterable) -> PartialMap:
        return cls({x: x for x in labels})


def compose(psi: Resource, phi: Resource) -> Resource:
    """``phi`` first, then ``psi``: ``(psi phi)_x(z) = sum_y phi_x(y) psi_y(z)``."""
    rows = {}
    for x, beta in phi.items():
        acc: dict = {}
        for y, w in beta.items():
            for z, v in psi[y].items():
                acc[z] = acc.get(z, ZERO) + w * v
        rows[x] = SourceElement(acc)
    return Resource(rows)


def compose_chain(factors: Sequence[Resource]) -> Resource:
    """Compose in application order: ``factors[0]`` is applied first."""
    if not factors:
        raise ValueError("empty chain")
    out = factors[0]
    for f in factors[1:]:
        out = compose(f, out)
    return out


def apply_request(phi: Resource, r: PartialMap) -> Resource:
    """``phi r``: input ``x`` reads row ``r[x]``; inputs outside ``r`` drop."""
    return Resource({x: phi[y] for x, y in r.items()})


def apply_policy(p: PartialMap, phi: Resource) -> Resource:
    """``p phi``: push every row forward through ``p``, losing mass outside its domain."""
    rows = {}
    for x, beta in phi.items():
        acc: dict = {}
        for y, w in beta.items():
            if y in p:
                acc[p[y]] = acc.get(p[y], ZERO) + w
        rows[x] = SourceElement(acc)
    return Resource(rows)


def _inputs(Phi: Sequence[Resource]) -> list:
    labels = set()
    for phi in Phi:
        labels |= phi.support
    return sorted(labels)


def resource_fusion(Phi: Sequence[Resource]) -> Resource:
    """Fuse pointwise along inputs; absent rows count as the empty source."""
    if not Phi:
        raise ValueError("fusion needs a nonempty set")
    return Resource({x: lattice.fusion([phi[x] for phi in Phi]) for x in _inputs(Phi)})


def resource_meet(Phi: Sequence[Resource]) -> Resource:
    if not Phi:
        raise ValueError("meet needs a nonempty set")
    return Resource({x: lattice.meet([phi[x] for phi in Phi]) for x in _inputs(Phi)})


def resource_leq(phi: Resource, psi: Resource) -> bool:
    """Pointwise majorization on every input of either support."""
    return all(is_majorized(phi[x], psi[x]) for x in _inputs([phi, psi]))


def failing_inputs(phi: Resource, psi: Resource) -> list:
    """Inputs where ``phi[x]`` is not majorized by ``psi[x]``."""
    return [x for x in _inputs([phi, psi]) if not is_majorized(phi[x], psi[x])]


def resource_cycles(Phi: Sequence[Resource]) -> dict:
    """``{x: cycle}`` for inputs where the rows of ``Phi`` are inconsistent."""
    out = {}
    for x in _inputs(Phi):
        cyc = lattice.find_cycle([phi[x] for phi in Phi])
        if cyc is not None:
            out[x] = cyc
    return out


__all__ = [
    "EMPTY_RESOURCE", "PartialMap", "Resource", "apply_policy",
    "apply_request", "bsc", "compose", "compose_chain", "failing_inputs",
    "from_table", "identity_resource", "resource_cycles", "resource_fusion",
    "resource_leq", "resource_meet",
]
