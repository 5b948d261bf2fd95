"""Independent oracles, random generators and hypothesis strategies for the test suite.

Oracles here deliberately avoid the library's own algorithms: they sort and
accumulate directly, enumerate permutations, and use networkx for graph work.
"""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import accumulate, permutations

import networkx as nx
from hypothesis import strategies as st

from privfuse.noninterference import ActionAlphabet, SharedMachine
from privfuse.protocol import Casting
from privfuse.resources import PartialMap, Resource
from privfuse.weights import SourceElement

F = Fraction
LABELS = "abcdef"

BETA = SourceElement({"w": F(1, 10), "x": F(2, 10), "y": F(2, 10), "z": F(3, 10)})
GAMMA = SourceElement({"w": F(1, 10), "x": F(1, 10), "y": F(3, 10), "z": F(5, 10)})
DELTA = SourceElement({"w": F(6, 10), "x": F(1, 10), "y": F(1, 10), "z": F(2, 10)})
TENTH = SourceElement({u: F(1, 10) for u in "wxyz"})


# -- oracles -------------------------------------------------------------------

def sorted_desc(beta, n: int) -> list:
    vals = sorted((v for v in dict(beta).values() if v), reverse=True)
    return vals + [F(0)] * (n - len(vals))


def oracle_majorized(beta, gamma) -> bool:
    n = max(len(beta), len(gamma))
    b = list(accumulate(sorted_desc(beta, n)))
    g = list(accumulate(sorted_desc(gamma, n)))
    return all(x <= y for x, y in zip(b, g))


def oracle_union(B) -> list:
    return sorted({u for beta in B for u, v in dict(beta).items() if v})


def oracle_common_orderings(B):
    """Yield every enumeration of the union along which all members are nonincreasing."""
    U = oracle_union(B)
    for perm in permutations(U):
        if all(all(beta.get(perm[i], 0) >= beta.get(perm[i + 1], 0) for i in range(len(perm) - 1))
               for beta in B):
            yield perm


def oracle_consistent(B) -> bool:
    return next(oracle_common_orderings(B), None) is not None


def strict_graph(B) -> nx.DiGraph:
    """Edge ``u -> v`` when some member strictly prefers ``v`` over ``u``."""
    G = nx.DiGraph()
    U = oracle_union(B)
    G.add_nodes_from(U)
    for beta in B:
        for u in U:
            for v in U:
                if beta.get(u, 0) < beta.get(v, 0):
                    G.add_edge(u, v)
    return G


def oracle_sccs(B) -> set:
    return {frozenset(c) for c in nx.strongly_connected_components(strict_graph(B))}


def oracle_hats(B) -> list:
    """Class-wise minimum of every member over the strict-preference SCCs."""
    comps = oracle_sccs(B)
    out = []
    for beta in B:
        row = {}
        for c in comps:
            m = min(beta.get(u, F(0)) for u in c)
            for u in c:
                if m:
                    row[u] = m
        out.append(row)
    return out


def oracle_hull(curve) -> list:
    """Least concave majorant of ``(0,0),(1,c0),...`` by maximising over every chord."""
    pts = [F(0)] + list(curve)
    n = len(pts)
    out = []
    for k in range(1, n):
        best = pts[k]
        for i in range(k + 1):
            for j in range(k, n):
                if i < j:
                    best = max(best, pts[i] + (pts[j] - pts[i]) * F(k - i, j - i))
        out.append(best)
    return out


def oracle_join(B) -> dict:
    """Join of a consistent set: concave hull of the prefix-sum maximum along a common ordering."""
    perm = next(oracle_common_orderings(B))
    tops = [max(acc) for acc in zip(*[list(accumulate(beta.get(u, F(0)) for u in perm)) for beta in B])]
    tops = oracle_hull(tops)
    vals = [t - s for t, s in zip(tops, [F(0)] + tops[:-1])]
    return {u: v for u, v in zip(perm, vals) if v}


def oracle_meet(B) -> dict:
    perm = next(oracle_common_orderings(B))
    bots = [min(acc) for acc in zip(*[list(accumulate(beta.get(u, F(0)) for u in perm)) for beta in B])]
    vals = [t - s for t, s in zip(bots, [F(0)] + bots[:-1])]
    return {u: v for u, v in zip(perm, vals) if v}


def oracle_fusion(B) -> dict:
    if not any(dict(b) for b in B):
        return {}
    return oracle_join(oracle_hats([dict(b) for b in B]))


def apply_map_in(phi: dict, r: dict) -> dict:
    """``phi . r``: input x reads row ``phi[r[x]]``."""
    return {x: dict(phi[y]) for x, y in r.items() if y in phi and phi[y]}


def apply_map_out(p: dict, phi: dict) -> dict:
    """``p . phi``: push each row forward through ``p``."""
    out = {}
    for x, row in phi.items():
        acc = {}
        for y, w in row.items():
            if y in p:
                acc[p[y]] = acc.get(p[y], F(0)) + w
        acc = {k: v for k, v in acc.items() if v}
        if acc:
            out[x] = acc
    return out


def oracle_compose(psi: dict, phi: dict) -> dict:
    """``(psi . phi)_x(z) = sum_y phi_x(y) psi_y(z)``."""
    out = {}
    for x, row in phi.items():
        acc = {}
        for y, w in row.items():
            for z, v in psi.get(y, {}).items():
                acc[z] = acc.get(z, F(0)) + w * v
        acc = {k: v for k, v in acc.items() if v}
        if acc:
            out[x] = acc
    return out


def oracle_resource_fusion(Phi) -> dict:
    xs = sorted({x for phi in Phi for x in phi})
    out = {}
    for x in xs:
        row = oracle_fusion([dict(phi.get(x, {})) for phi in Phi])
        if row:
            out[x] = row
    return out


def plain(phi) -> dict:
    """A Resource (or nested mapping) as plain dicts of Fractions."""
    return {x: {y: F(w) for y, w in dict(row).items()} for x, row in dict(phi).items() if dict(row)}


# -- seeded random generators --------------------------------------------------

def rand_weights(rng: random.Random, labels, max_den: int = 64, allow_deficit: bool = True) -> dict:
    """Random exact weights on ``labels`` with a common denominator at most ``max_den``."""
    den = rng.randint(max(1, len(labels)), max(max_den, len(labels)))
    budget = rng.randint(0, den) if allow_deficit else den
    cuts = sorted(rng.randint(0, budget) for _ in range(len(labels) - 1))
    parts = [b - a for a, b in zip([0] + cuts, cuts + [budget])]
    return {u: F(k, den) for u, k in zip(labels, parts) if k}


def rand_source(rng: random.Random, max_support: int = 6, max_den: int = 64, pool=LABELS) -> SourceElement:
    k = rng.randint(0, max_support)
    labels = rng.sample(pool, min(k, len(pool)))
    return SourceElement(rand_weights(rng, labels, max_den))


def rand_below(rng: random.Random, gamma: SourceElement, max_den: int = 64) -> SourceElement:
    """A source majorized by ``gamma``: random transfers from richer to poorer labels, then shrink."""
    w = dict(gamma)
    labels = list(w) + [u for u in LABELS if u not in w][: rng.randint(0, max(0, 6 - len(w)))]
    for _ in range(rng.randint(0, 4)):
        if len(labels) < 2:
            break
        u, v = rng.sample(labels, 2)
        a, b = w.get(u, F(0)), w.get(v, F(0))
        if a < b:
            u, v, a, b = v, u, b, a
        t = (a - b) * F(rng.randint(0, 4), 8)
        w[u], w[v] = a - t, b + t
    for u in list(w):
        w[u] = w[u] * F(rng.randint(max_den // 2, max_den), max_den)
    return SourceElement({u: v for u, v in w.items() if v})


def rand_consistent_set(rng: random.Random, size: int, n_labels: int, pool=LABELS[:5]) -> list:
    """Members that are all nonincreasing along one random enumeration (ties allowed)."""
    order = rng.sample(pool, n_labels)
    B = []
    for _ in range(size):
        den = rng.randint(n_labels, 32)
        budget = rng.randint(0, den)
        raw = sorted((rng.randint(0, budget) for _ in range(n_labels)), reverse=True)
        while sum(raw) > budget:
            i = max(i for i, v in enumerate(raw) if v)
            raw[i] -= 1
        B.append(SourceElement({u: F(k, den) for u, k in zip(order, raw) if k}))
    return B


def rand_set(rng: random.Random, max_members: int = 3, max_union: int = 5) -> list:
    """Random sets biased towards ties and shared orders, so both verdicts occur often."""
    m = rng.randint(1, max_members)
    n = rng.randint(1, max_union)
    if rng.random() < 0.4:
        return rand_consistent_set(rng, m, n)
    pool = LABELS[:n]
    out = []
    for _ in range(m):
        labels = rng.sample(pool, rng.randint(0, n))
        den = rng.choice([4, 6, 8, 10, 12])
        out.append(SourceElement(rand_weights(rng, labels, den)))
    return out


def rand_substochastic(rng: random.Random, n: int) -> list:
    den = rng.choice([2, 3, 4, 6, 8, 12])
    rows = [[F(rng.randint(0, den) if rng.random() < 0.6 else 0, den) for _ in range(n)] for _ in range(n)]
    peak = max([sum(r) for r in rows] + [sum(c) for c in zip(*rows)] + [F(1)])
    if rng.random() < 0.5:
        peak *= F(rng.randint(4, 8), 4)
    return [[v / peak for v in r] for r in rows]


def rand_resource(rng: random.Random, xs, ys, max_den: int = 12, density: float = 0.7) -> Resource:
    rows = {}
    for x in xs:
        if rng.random() < density:
            rows[x] = rand_weights(rng, rng.sample(list(ys), rng.randint(1, len(ys))), max_den)
    return Resource(rows)


def rand_machine(rng: random.Random, n_states: int, n_actions: dict, n_obs: int = 2) -> SharedMachine:
    states = tuple(f"s{i}" for i in range(n_states))
    alphabet = ActionAlphabet({s: {f"{s.lower()}{i}" for i in range(k)} for s, k in n_actions.items()})
    delta = {(q, a): rng.choice(states) for q in states for a in alphabet.merged}
    observe = {s: {q: str(rng.randrange(n_obs)) for q in states} for s in n_actions}
    return SharedMachine(states, states[0], alphabet, delta, observe)


def section_casting(project: dict) -> Casting:
    """Casting whose embedding picks the least preimage of each local label."""
    embed = {}
    for g in sorted(project):
        embed.setdefault(project[g], g)
    return Casting(PartialMap(embed), PartialMap(project))


# -- hypothesis strategies -----------------------------------------------------

@st.composite
def sources(draw, max_support: int = 6, max_den: int = 64, pool: str = LABELS):
    labels = draw(st.lists(st.sampled_from(pool), unique=True, max_size=min(max_support, len(pool))))
    den = draw(st.integers(1, max_den))
    nums = draw(st.lists(st.integers(0, den), min_size=len(labels), max_size=len(labels)))
    total = sum(nums)
    if total > den:
        nums = [k * den // total for k in nums]
    return SourceElement({u: F(k, den) for u, k in zip(labels, nums) if k})


def source_sets(max_members: int = 3, pool: str = LABELS[:5], max_den: int = 12):
    return st.lists(sources(max_support=len(pool), max_den=max_den, pool=pool),
                    min_size=1, max_size=max_members)


@st.composite
def rational_seqs(draw, max_len: int = 8):
    return [F(n, d) for n, d in draw(st.lists(st.tuples(st.integers(-20, 20), st.integers(1, 12)),
                                               max_size=max_len))]
