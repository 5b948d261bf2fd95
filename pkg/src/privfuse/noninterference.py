"""Noninterference for shared deterministic machines and deterministic resources.

Subjects feed actions from disjoint alphabets into one machine and each
subject observes its state. A subject is not interfered with when any two
input strings that look the same to it (same subsequence of its own
actions) lead to states it observes identically. Two deciders are offered:

* :func:`ni_product` searches the pair graph of the machine with itself,
  which is finite, so the verdict is exact for all string lengths;
* :func:`ni_bruteforce` checks all strings up to a length bound, grouped by
  their projection, and serves as the oracle for the former.
"""

from __future__ import annotations

from collections import deque
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from itertools import product

from .errors import InvalidMachine, NotDeterministic, UnknownSubject
from .protocol import Casting
from .resources import PartialMap, Resource, apply_policy, resource_fusion, resource_meet


@dataclass(frozen=True)
class ActionAlphabet:
    """Per-subject action sets, pairwise disjoint."""

    actions: Mapping  # subject -> frozenset of actions

    def __post_init__(self):
        seen: dict = {}
        norm = {}
        for s in sorted(self.actions):
            acts = frozenset(self.actions[s])
            for a in acts:
                if a in seen:
                    raise InvalidMachine(f"action {a!r} belongs to both {seen[a]!r} and {s!r}")
                seen[a] = s
            norm[s] = acts
        object.__setattr__(self, "actions", norm)

    @property
    def subjects(self) -> tuple:
        return tuple(self.actions)

    @property
    def merged(self) -> tuple:
        return tuple(sorted(a for acts in self.actions.values() for a in acts))

    def of(self, subject) -> frozenset:
        if subject not in self.actions:
            raise UnknownSubject(f"unknown subject {subject!r}")
        return self.actions[subject]

    def owner(self, action):
        for s, acts in self.actions.items():
            if action in acts:
                return s
        raise InvalidMachine(f"action {action!r} belongs to no subject")


def project_string(x: Sequence, subject, alphabet: ActionAlphabet) -> tuple:
    """Keep the subject's own actions, in order."""
    own = alphabet.of(subject)
    return tuple(a for a in x if a in own)


def embed_string(w: Sequence, subject, alphabet: ActionAlphabet) -> tuple:
    """Inclusion of the subject's strings into merged strings."""
    own = alphabet.of(subject)
    if any(a not in own for a in w):
        raise InvalidMachine(f"string {tuple(w)} is not over {subject!r}'s actions")
    return tuple(w)


@dataclass(frozen=True)
class SharedMachine:
    """Deterministic machine over a merged alphabet with per-subject observations."""

    states: tuple
    initial: object
    alphabet: ActionAlphabet
    delta: Mapping  # (state, action) -> state
    observe: Mapping  # subject -> {state: observation}

    def __post_init__(self):
        states = set(self.states)
        if len(states) != len(self.states):
            raise InvalidMachine("repeated state")
        if self.initial not in states:
            raise InvalidMachine(f"initial state {self.initial!r} is not a state")
        for s in self.states:
            for a in self.alphabet.merged:
                t = self.delta.get((s, a))
                if t is None:
                    raise InvalidMachine(f"no transition from {s!r} on {a!r}")
                if t not in states:
                    raise InvalidMachine(f"transition to unknown state {t!r}")
        for subj, obs in self.observe.items():
            self.alphabet.of(subj)
            missing = [s for s in self.states if s not in obs]
            if missing:
                raise InvalidMachine(f"{subj!r} has no observation for {missing[0]!r}")

    def step(self, s, a):
        return self.delta[(s, a)]

    def run(self, x: Iterable, start=None):
        s = self.initial if start is None else start
        for a in x:
            s = self.delta[(s, a)]
        return s

    def observation(self, subject, x: Iterable):
        return self.observe_state(subject, self.run(x))

    def observe_state(self, subject, s):
        if subject not in self.observe:
            raise UnknownSubject(f"{subject!r} observes nothing")
        return self.observe[subject][s]


@dataclass(frozen=True)
class NIVerdict:
    passed: bool
    subject: str
    method: str
    witness: tuple | None = None  # (x, x'): same projection, different observation
    observations: tuple | None = None
    explored: int = 0


def _fail(M, subject, method, x, x2, explored):
    return NIVerdict(False, subject, method, (tuple(x), tuple(x2)),
                     (M.observation(subject, x), M.observation(subject, x2)), explored)


def ni_product(M: SharedMachine, subject) -> NIVerdict:
    """Exact decision by breadth-first search of the self-composition.

    From ``(init, init)`` a subject action moves both sides; any other action
    moves one side alone. Reached pairs are exactly the end states of two
    strings with equal projections, so interference shows up as a reached
    pair with different observations. The witness is a shortest one.
    """
    own = sorted(M.alphabet.of(subject))
    other = [a for a in M.alphabet.merged if a not in M.alphabet.of(subject)]
    start = (M.initial, M.initial)
    parent = {start: None}
    queue = deque([start])
    while queue:
        pair = queue.popleft()
        s, t = pair
        if M.observe_state(subject, s) != M.observe_state(subject, t):
            x, x2 = [], []
            cur = pair
            while parent[cur] is not None:
                prev, side, a = parent[cur]
                if side in ("both", "left"):
                    x.append(a)
                if side in ("both", "right"):
                    x2.append(a)
                cur = prev
            return _fail(M, subject, "product", x[::-1], x2[::-1], len(parent))
        moves = [((M.step(s, a), M.step(t, a)), "both", a) for a in own]
        moves += [((s, M.step(t, b)), "right", b) for b in other]
        moves += [((M.step(s, b), t), "left", b) for b in other]
        for nxt, side, a in moves:
            if nxt not in parent:
                parent[nxt] = (pair, side, a)
                queue.append(nxt)
    return NIVerdict(True, subject, "product", explored=len(parent))


def _closure(M, frontier: dict, other, budget: int) -> dict:
    """Extend ``{state: (extra, string)}`` by non-subject actions within ``budget`` extras."""
    out = dict(frontier)
    queue = deque(sorted(frontier, key=lambda s: (frontier[s][0], frontier[s][1])))
    while queue:
        s = queue.popleft()
        extra, x = out[s]
        if extra >= budget:
            continue
        for b in other:
            t = M.step(s, b)
            cand = (extra + 1, x + (b,))
            if t not in out or cand < out[t]:
                out[t] = cand
                queue.append(t)
    return out


def ni_bruteforce(M: SharedMachine, subject, L: int) -> NIVerdict:
    """Check every merged string of length at most ``L``, grouped by projection.

    For each projected word ``w`` the group's reachable end states are kept
    together with the fewest non-subject actions that reach them, so a
    state belongs to the group exactly when some string of length at most
    ``L`` projecting to ``w`` ends there. Groups with identical end-state
    data are explored once. Within a group the shortest (then
    lexicographically first) string per end state is kept as its witness.
    """
    if L < 0:
        raise ValueError("length bound must be nonnegative")
    own = sorted(M.alphabet.of(subject))
    other = [a for a in M.alphabet.merged if a not in M.alphabet.of(subject)]
    level = [((), _closure(M, {M.initial: (0, ())}, other, L))]
    explored = 0
    for depth in range(L + 1):
        seen_keys = set()
        nxt_level = []
        for w, frontier in level:
            key = frozenset((s, e) for s, (e, _) in frontier.items())
            if key in seen_keys:
                continue
            seen_keys.add(key)
            explored += 1
            ranked = sorted(frontier.items(), key=lambda kv: kv[1])
            ref_state, (_, ref_x) = ranked[0]
            ref_obs = M.observe_state(subject, ref_state)
            for s, (_, x) in ranked[1:]:
                if M.observe_state(subject, s) != ref_obs:
                    return _fail(M, subject, "bruteforce", ref_x, x, explored)
            if depth == L:
                continue
            budget = L - depth - 1
            for a in own:
                moved: dict = {}
                for s, (e, x) in frontier.items():
                    if e > budget:
                        continue
                    t = M.step(s, a)
                    cand = (e, x + (a,))
                    if t not in moved or cand < moved[t]:
                        moved[t] = cand
                if moved:
                    nxt_level.append((w + (a,), _closure(M, moved, other, budget)))
        level = nxt_level
    return NIVerdict(True, subject, "bruteforce", explored=explored)


def ni_enumerate(M: SharedMachine, subject, L: int) -> NIVerdict:
    """Literal enumeration of all strings up to length ``L``; exponential, for small ``L``."""
    groups: dict = {}
    count = 0
    for n in range(L + 1):
        for x in product(M.alphabet.merged, repeat=n):
            count += 1
            w = project_string(x, subject, M.alphabet)
            obs = M.observation(subject, x)
            if w not in groups:
                groups[w] = (obs, x)
            elif groups[w][0] != obs:
                return _fail(M, subject, "enumerate", groups[w][1], x, count)
    return NIVerdict(True, subject, "enumerate", explored=count)


def default_bound(M: SharedMachine) -> int:
    """``2 * states**2``, enough for any shortest pair-graph witness."""
    return 2 * len(M.states) ** 2


# -- deterministic resources ---------------------------------------------------

@dataclass(frozen=True)
class NIForms:
    """Verdicts of the three equivalent formulations, plus a witness pair if any fails."""

    factors: bool  # rho_bar . phi = phi_bar . pi_bar for some phi_bar
    square: bool   # rho . psi = psi and psi . pi = psi, with psi = rho . phi
    fixed: bool    # psi = rho . psi . pi
    witness: tuple | None = None

    @property
    def agree(self) -> bool:
        return self.factors == self.square == self.fixed


def _det_map(phi: Resource) -> PartialMap:
    if not phi.is_deterministic():
        raise NotDeterministic("resource is not a partial function")
    return PartialMap({x: next(iter(beta)) for x, beta in phi.items()})


def _universe(phi: Resource, pi: Casting, extra: Iterable = ()) -> list:
    return sorted(set(phi.support) | pi.project.domain | pi.embed.image | set(extra))


def _after(f: PartialMap, x):
    return f.get(x) if x is not None else None


def deterministic_ni_forms(phi: Resource, pi: Casting, rho: Casting,
                           inputs: Iterable = ()) -> NIForms:
    """Evaluate the three formulations on the observed map ``psi = rho . phi``.

    Undefined values are compared as a value of their own. ``inputs`` can
    add global inputs outside the support of ``phi`` and the casting.
    """
    f = _det_map(phi)
    U = _universe(phi, pi, inputs)
    pi_bar, pi_ = pi.project, pi.projector
    rho_bar, rho_ = rho.project, rho.projector

    # factoring through the local castings
    table: dict = {}
    factors = True
    witness = None
    for x in U:
        key = pi_bar.get(x)
        val = _after(rho_bar, f.get(x))
        if key is None:
            if val is not None:
                factors = False
                witness = witness or (x, x)
            continue
        if key in table and table[key][0] != val:
            factors = False
            witness = witness or (table[key][1], x)
        table.setdefault(key, (val, x))

    psi = {x: _after(rho_, f.get(x)) for x in U}
    square = all(_after(rho_, psi[x]) == psi[x] for x in U) and \
        all((psi.get(pi_.get(x)) if pi_.get(x) is not None else None) == psi[x] for x in U)
    fixed = all(_after(rho_, psi.get(pi_.get(x)) if pi_.get(x) is not None else None) == psi[x]
                for x in U)
    return NIForms(factors, square, fixed, witness)


def phi_bar(phi: Resource, pi: Casting, rho: Casting) -> PartialMap | None:
    """The local map ``phi_bar`` with ``rho_bar . phi = phi_bar . pi_bar``, if it exists."""
    f = _det_map(phi)
    out: dict = {}
    for x in _universe(phi, pi):
        key = pi.project.get(x)
        val = _after(rho.project, f.get(x))
        if key is None:
            if val is not None:
                return None
            continue
        if key in out and out[key] != val:
            return None
        out[key] = val
    return PartialMap({k: v for k, v in out.items() if v is not None})


@dataclass(frozen=True)
class ExactNIReport:
    passed: bool
    witness: tuple | None = None  # (x, x')


def _grouped_equal(U, key_of, val_of) -> ExactNIReport:
    first: dict = {}
    for x in U:
        k = key_of(x)
        v = val_of(x)
        if k in first:
            if first[k][0] != v:
                return ExactNIReport(False, (first[k][1], x))
        else:
            first[k] = (v, x)
    return ExactNIReport(True)


def stochastic_ni_check(phi: Resource, pi: Casting, rho: Casting,
                        inputs: Iterable = ()) -> ExactNIReport:
    """Exact check for stochastic resources: observed distributions equal on the nose.

    ``x`` and ``x'`` with the same projection must give identical pushed-forward
    source elements ``rho_bar . phi_x``.
    """
    observed = apply_policy(rho.project, phi)
    U = _universe(phi, pi, inputs)
    return _grouped_equal(U, lambda x: ("in", pi.project.get(x)), lambda x: observed[x])


def localized_ni_check(phi_a: Resource, phi_ab: Resource, phi_b: Resource,
                       rho_a: Casting, inputs: Iterable = ()) -> ExactNIReport:
    """Localized variant between A and B, compared exactly.

    Inputs A cannot tell apart through ``rho_a . phi_ab`` must also be
    indistinguishable through ``rho_a . ((phi_a fused with phi_ab) meet phi_b)``.
    """
    released = apply_policy(rho_a.project, phi_ab)
    learned = apply_policy(rho_a.project, resource_meet([resource_fusion([phi_a, phi_ab]), phi_b]))
    U = sorted(phi_a.support | phi_ab.support | phi_b.support | set(inputs))
    return _grouped_equal(U, lambda x: released[x], lambda x: learned[x])


# -- fixtures ------------------------------------------------------------------

def elevator(floors: int = 3, subjects: Sequence = ("A", "B"), initial: int = 1) -> SharedMachine:
    """Shared elevator: ``call_S_f`` sends the cabin to floor ``f``; all observe the floor."""
    states = tuple(range(1, floors + 1))
    alphabet = ActionAlphabet({s: {f"call_{s}_{f}" for f in states} for s in subjects})
    delta = {(q, a): int(a.rsplit("_", 1)[1]) for q in states for a in alphabet.merged}
    observe = {s: {q: str(q) for q in states} for s in subjects}
    return SharedMachine(states, initial, alphabet, delta, observe)


def counter_machine(n: int = 3, subjects: Sequence = ("A", "B")) -> SharedMachine:
    """Each subject's private counter mod ``n``; a subject observes only its own."""
    states = tuple(product(range(n), repeat=len(subjects)))
    alphabet = ActionAlphabet({s: {f"inc_{s}"} for s in subjects})
    delta = {}
    for q in states:
        for i, s in enumerate(subjects):
            r = list(q)
            r[i] = (r[i] + 1) % n
            delta[(q, f"inc_{s}")] = tuple(r)
    observe = {s: {q: str(q[i]) for q in states} for i, s in enumerate(subjects)}
    return SharedMachine(states, states[0], alphabet, delta, observe)


__all__ = [
    "ActionAlphabet", "ExactNIReport", "NIForms", "NIVerdict", "SharedMachine",
    "counter_machine", "default_bound", "deterministic_ni_forms", "elevator",
    "embed_string", "localized_ni_check", "ni_bruteforce", "ni_enumerate",
    "ni_product", "phi_bar", "project_string", "stochastic_ni_check",
]
