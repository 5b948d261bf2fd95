"""Source elements, preferences, orderings and the prefix-sum calculus.

A source element is a finitely supported sub-probability distribution over
string labels. Weights are :class:`fractions.Fraction` throughout; nothing in
this package ever rounds.
"""

from __future__ import annotations

import enum
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from itertools import accumulate

from .errors import (
    DuplicateLabel,
    LengthMismatch,
    NegativeWeight,
    NotAnOrdering,
    TotalWeightExceedsOne,
)

ZERO = Fraction(0)
ONE = Fraction(1)

Label = str
Weight = Fraction


def as_weight(value) -> Fraction:
    """Convert ``value`` to an exact rational.

    Accepts Fractions, ints, strings such as ``"3/10"`` or ``"0.3"``, and
    floats. Floats are read through their shortest decimal repr, so ``0.1``
    becomes ``1/10`` rather than the nearest binary double.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not weights")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as a weight")


class SourceElement(Mapping):
    """Immutable map from labels to positive weights with total weight <= 1.

    Indexing a label outside the support returns 0 rather than raising, since
    a source element is a function on the whole label universe. Iteration
    and ``in`` only see the support.
    """

    __slots__ = ("_w", "_total", "_hash")

    def __init__(self, weights: Mapping | Iterable = ()):
        items = weights.items() if isinstance(weights, Mapping) else weights
        stored = {}
        for label, value in items:
            label = str(label)
            if label in stored:
                raise DuplicateLabel(f"label {label!r} given twice")
            w = as_weight(value)
            if w < 0:
                raise NegativeWeight(f"weight of {label!r} is negative: {w}")
            stored[label] = w
        total = sum(stored.values(), ZERO)
        if total > 1:
            raise TotalWeightExceedsOne(f"total weight {total} exceeds 1")
        self._w = {k: stored[k] for k in sorted(stored) if stored[k] != 0}
        self._total = total
        self._hash = None

    # Mapping protocol
    def __getitem__(self, label) -> Fraction:
        return self._w.get(label, ZERO)

    def __iter__(self):
        return iter(self._w)

    def __len__(self) -> int:
        return len(self._w)

    def __contains__(self, label) -> bool:
        return label in self._w

    def __eq__(self, other):
        if isinstance(other, SourceElement):
            return self._w == other._w
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._w.items()))
        return self._hash

    def __repr__(self):
        body = ", ".join(f"{k}: {v}" for k, v in self._w.items())
        return f"SourceElement({{{body}}})"

    def __call__(self, label) -> Fraction:
        return self._w.get(label, ZERO)

    @property
    def support(self) -> frozenset:
        return frozenset(self._w)

    @property
    def size(self) -> int:
        return len(self._w)

    @property
    def total(self) -> Fraction:
        return self._total

    @property
    def deficiency(self) -> Fraction:
        """Chance of producing no output at all."""
        return ONE - self._total

    def is_empty(self) -> bool:
        return not self._w


EMPTY = SourceElement()


def make_source(entries: Iterable) -> SourceElement:
    """Build a source element from ``(label, weight)`` pairs.

    Zero weights are dropped; duplicate labels, negative weights and a total
    above one are rejected.
    """
    return SourceElement(list(entries))


def point_mass(label: Label) -> SourceElement:
    return SourceElement({label: ONE})


# -- preferences -------------------------------------------------------------

class Preference(enum.Enum):
    BELOW = "<"
    INDIFFERENT = "~"
    ABOVE = ">"


def prefer(beta: SourceElement, u: Label, v: Label) -> Preference:
    """Compare ``u`` and ``v`` by their weight under ``beta``."""
    a, b = beta[u], beta[v]
    if a < b:
        return Preference.BELOW
    if a == b:
        return Preference.INDIFFERENT
    return Preference.ABOVE


def indifference_classes(beta: SourceElement, universe: Iterable[Label] | None = None) -> list[frozenset]:
    """Indifference classes of ``beta``, lowest weight first.

    Only the support is considered unless ``universe`` is given, in which
    case absent labels form the zero-weight class.
    """
    labels = set(beta.support if universe is None else universe)
    by_weight: dict[Fraction, set] = {}
    for label in labels:
        by_weight.setdefault(beta[label], set()).add(label)
    return [frozenset(by_weight[w]) for w in sorted(by_weight)]


# -- orderings ---------------------------------------------------------------

@dataclass(frozen=True)
class Ordering:
    """An injective enumeration of labels, position 0 first.

    ``labels[i]`` is the forward map; :meth:`position` is the retraction,
    defined on the listed labels.
    """

    labels: tuple

    def __post_init__(self):
        labels = tuple(str(x) for x in self.labels)
        if len(set(labels)) != len(labels):
            raise NotAnOrdering(f"ordering repeats a label: {labels}")
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def __getitem__(self, i):
        return self.labels[i]

    def position(self, label: Label) -> int | None:
        try:
            return self.labels.index(label)
        except ValueError:
            return None


def canonical_ordering(beta: SourceElement) -> Ordering:
    """Support sorted by weight descending, ties broken by label ascending."""
    return Ordering(tuple(sorted(beta.support, key=lambda y: (-beta[y], y))))


def is_ordering(theta: Ordering, beta: SourceElement) -> bool:
    """Whether ``theta`` lists all of supp beta in nonincreasing weight order."""
    if not beta.support <= set(theta.labels):
        return False
    seq = [beta[y] for y in theta.labels]
    return all(a >= b for a, b in zip(seq, seq[1:]))


def apply_ordering(beta: SourceElement, theta: Ordering) -> tuple:
    """The descending sequence obtained by reading ``beta`` along ``theta``."""
    if not is_ordering(theta, beta):
        raise NotAnOrdering(f"{theta.labels} is not an ordering of {beta!r}")
    return tuple(beta[y] for y in theta.labels)


def unapply_ordering(seq: Sequence, theta: Ordering) -> SourceElement:
    """Put ``seq[i]`` back on label ``theta[i]``; inverse of apply_ordering."""
    if len(seq) > len(theta):
        raise LengthMismatch(f"sequence of length {len(seq)} exceeds ordering of length {len(theta)}")
    return SourceElement(zip(theta.labels, seq))


def descending(beta: SourceElement, length: int | None = None) -> tuple:
    """beta's weights sorted descending, zero-padded to ``length``."""
    seq = sorted(beta.values(), reverse=True)
    if length is not None:
        if length < len(seq):
            raise LengthMismatch(f"cannot fit {len(seq)} weights into length {length}")
        seq.extend([ZERO] * (length - len(seq)))
    return tuple(seq)


def is_descending(seq: Sequence) -> bool:
    return (all(x >= 0 for x in seq)
            and all(a >= b for a, b in zip(seq, seq[1:]))
            and sum(seq, ZERO) <= 1)


def pad(seq: Sequence, length: int) -> tuple:
    if len(seq) > length:
        raise LengthMismatch(f"sequence longer than {length}")
    return tuple(seq) + (ZERO,) * (length - len(seq))


# -- sequence calculus -------------------------------------------------------

def integral(seq: Sequence) -> tuple:
    """Prefix sums."""
    return tuple(accumulate(seq))


def differential(seq: Sequence) -> tuple:
    """Successive differences, with an implicit 0 before the first entry."""
    out = []
    prev = ZERO
    for x in seq:
        out.append(x - prev)
        prev = x
    return tuple(out)
