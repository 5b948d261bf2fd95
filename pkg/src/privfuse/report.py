"""Canonical text and JSON renderings of analysis results.

Rationals always print as ``p/q`` in lowest terms (integers as ``p``), and
every collection is emitted in a fixed order, so identical inputs give
byte-identical reports.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .lattice import format_cycle
from .majorization import ConvexDecomposition, cycle_notation
from .matrix import Matrix
from .resources import Resource
from .weights import SourceElement


def q(v) -> str:
    return str(Fraction(v))


def source_json(beta: SourceElement) -> dict:
    return {y: q(w) for y, w in beta.items()}


def source_text(beta: SourceElement) -> str:
    return "{" + ", ".join(f"{y}: {q(w)}" for y, w in beta.items()) + "}"


def resource_json(phi: Resource) -> dict:
    return {x: source_json(b) for x, b in phi.items()}


def resource_text(phi: Resource, indent: str = "  ") -> list:
    if not phi:
        return [indent + "(empty)"]
    return [f"{indent}{x} -> {source_text(b)}" for x, b in phi.items()]


def seq_text(seq) -> str:
    return "<" + ", ".join(q(v) for v in seq) + ">"


def matrix_json(M: Matrix) -> dict:
    return {"shape": list(M.shape), "entries": [[i, j, q(v)] for (i, j), v in M.entries.items()]}


def matrix_text(M: Matrix, indent: str = "  ") -> list:
    if M.n_rows == 0:
        return [indent + "[]"]
    rows = [[q(v) for v in row] for row in M.to_rows()]
    width = max(len(c) for row in rows for c in row)
    return [indent + "[" + " ".join(c.rjust(width) for c in row) + "]" for row in rows]


def decomposition_json(dec: ConvexDecomposition) -> dict:
    return {"n": dec.n, "total_weight": q(dec.total_weight),
            "terms": [{"weight": q(t.weight), "perm": cycle_notation(t.mapping),
                       "pairs": [list(p) for p in t.perm]} for t in dec.terms]}


def decomposition_text(dec: ConvexDecomposition, indent: str = "  ") -> list:
    lines = [f"{indent}{q(t.weight)} * {cycle_notation(t.mapping)}" for t in dec.terms]
    lines.append(f"{indent}total weight {q(dec.total_weight)}")
    return lines


def cycle_json(cycle, names=None) -> dict:
    return {"labels": [u for u, _ in cycle],
            "members": [names[i] if names else i for _, i in cycle],
            "text": format_cycle(cycle)}


def string_text(x) -> str:
    return "<" + ",".join(x) + ">"


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=False, ensure_ascii=False) + "\n"


__all__ = [
    "cycle_json", "decomposition_json", "decomposition_text", "dumps", "matrix_json",
    "matrix_text", "q", "resource_json", "resource_text", "seq_text", "source_json",
    "source_text", "string_text",
]
