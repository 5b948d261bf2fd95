"""Evaluate scenario checks and subcommand requests into report fragments.

Each analysis returns a :class:`Result` holding a verdict, a JSON-ready
dict and human-readable lines; the CLI only chooses which to print.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import report as rp
from .errors import NotDeterministic, UnresolvedReference
from .lattice import (
    common_ordering,
    consistency_classes,
    find_cycle,
    format_cycle,
    fusion,
    impose_consistency,
    is_consistent,
    meet,
)
from .majorization import (
    is_majorized,
    label_witness,
    partial_permutation_decomposition,
    substochastic_witness,
    verify_witness,
)
from .noninterference import (
    default_bound,
    deterministic_ni_forms,
    ni_bruteforce,
    ni_product,
)
from .protocol import local_privacy_check, run_scenario, strong_privacy_check
from .resources import Resource, failing_inputs, resource_leq
from .scenario import Scenario
from .weights import descending, integral


@dataclass
class Result:
    name: str
    kind: str
    passed: bool
    data: dict = field(default_factory=dict)
    lines: list = field(default_factory=list)

    def as_json(self) -> dict:
        return {"name": self.name, "kind": self.kind, "passed": self.passed, **self.data}


class Session:
    """A parsed scenario plus memoized script runs."""

    def __init__(self, sc: Scenario):
        self.sc = sc
        self._traces: dict = {}

    def trace(self, script: str):
        if script not in self._traces:
            if script not in self.sc.scripts:
                raise UnresolvedReference(f"unknown script {script!r}")
            self._traces[script] = run_scenario(self.sc.scripts[script], self.sc.network)
        return self._traces[script]

    def resource(self, ref: str, script: str | None = None) -> Resource:
        trace = self.trace(script) if script else None
        if ref.startswith("holdings."):
            subj = ref.split(".", 1)[1]
            if trace is not None:
                return trace.holdings[subj]
            return self.sc.network.subject_resource(subj)
        if trace is not None and ref in trace.produced:
            return trace.produced[ref]
        if self.sc.network is not None and ref in self.sc.network.resources:
            return self.sc.network.resources[ref]
        if ref in self.sc.resources:
            return self.sc.resources[ref]
        raise UnresolvedReference(f"unknown resource {ref!r}")

    def sources(self, ref) -> tuple:
        names = self.sc.source_set(ref)
        return names, [self.sc.sources[n] for n in names]


# -- lattice and majorization ----------------------------------------------------

def majorize(sess: Session, beta_name: str, gamma_name: str, name: str = "majorize") -> Result:
    _, (beta, gamma) = sess.sources([beta_name, gamma_name])
    ok = is_majorized(beta, gamma)
    data = {"beta": beta_name, "gamma": gamma_name, "majorized": ok}
    lines = [f"{beta_name} ≺ {gamma_name}: {'true' if ok else 'false'}"]
    if ok:
        D = substochastic_witness(beta, gamma)
        exact = verify_witness(D, beta, gamma)
        data["witness"] = rp.matrix_json(D)
        data["labelled_witness"] = [[u, v, rp.q(w)] for (u, v), w in
                                    sorted(label_witness(D, beta, gamma).items())]
        data["reconstruction"] = "exact" if exact else "mismatch"
        n = D.n_rows
        lines.append(f"witness D with D·{gamma_name}↓ = {beta_name}↓:")
        lines += rp.matrix_text(D)
        lines.append(f"{gamma_name}↓ = {rp.seq_text(descending(gamma, n))}")
        lines.append(f"{beta_name}↓ = {rp.seq_text(descending(beta, n))}")
        lines.append("reconstruction: " + data["reconstruction"])
        ok = exact
    else:
        n = max(beta.size, gamma.size)
        lo, hi = integral(descending(beta, n)), integral(descending(gamma, n))
        k = next(i for i, (a, b) in enumerate(zip(lo, hi)) if a > b)
        data["violation"] = {"index": k, "beta_prefix": rp.q(lo[k]), "gamma_prefix": rp.q(hi[k])}
        lines.append(f"prefix sum {k}: {rp.q(lo[k])} > {rp.q(hi[k])}")
    return Result(name, "majorize", ok, data, lines)


def decompose(sess: Session, beta_name: str, gamma_name: str, name: str = "decompose") -> Result:
    _, (beta, gamma) = sess.sources([beta_name, gamma_name])
    if not is_majorized(beta, gamma):
        return Result(name, "decompose", False, {"majorized": False},
                      [f"{beta_name} is not majorized by {gamma_name}; no decomposition"])
    dec = partial_permutation_decomposition(beta, gamma)
    n = dec.n
    exact = dec.apply(descending(gamma, n)) == descending(beta, n)
    lines = [f"{beta_name}↓ = Σ λᵢ Pᵢ {gamma_name}↓ with partial permutations Pᵢ (positions 0..{n - 1}):"]
    lines += rp.decomposition_text(dec)
    lines.append("reconstruction: " + ("exact" if exact else "mismatch"))
    data = {"majorized": True, "decomposition": rp.decomposition_json(dec),
            "reconstruction": "exact" if exact else "mismatch"}
    return Result(name, "decompose", exact, data, lines)


def consistency(sess: Session, set_ref, name: str = "consistency") -> Result:
    names, B = sess.sources(set_ref)
    part = consistency_classes(B)
    ok = is_consistent(B)
    data = {"set": names, "consistent": ok,
            "blocks": [sorted(b) for b in part.blocks], "ties": list(part.ties),
            "order": part.describe()}
    if ok:
        data["common_ordering"] = list(common_ordering(B).labels)
        lines = [f"consistent; order {part.describe()}",
                 "common ordering: " + ",".join(data["common_ordering"])]
    else:
        cyc = find_cycle(B)
        data["cycle"] = rp.cycle_json(cyc, names)
        lines = [f"inconsistent; cycle {format_cycle(cyc)}",
                 "  via " + format_cycle(cyc, names),
                 f"classes {part.describe()}"]
    return Result(name, "consistent", ok, data, lines)


def fuse(sess: Session, set_ref, name: str = "fuse") -> Result:
    names, B = sess.sources(set_ref)
    hats = impose_consistency(B)
    out = fusion(B)
    low = meet(B)
    cyc = find_cycle(B)
    data = {"set": names, "fusion": rp.source_json(out), "meet": rp.source_json(low),
            "hats": {n: rp.source_json(h) for n, h in zip(names, hats)},
            "classes": consistency_classes(B).describe()}
    lines = [f"fusion = {rp.source_text(out)}", f"meet   = {rp.source_text(low)}",
             f"classes {data['classes']}"]
    lines += [f"  {n}^ = {rp.source_text(h)}" for n, h in zip(names, hats)]
    if cyc is not None:
        data["cycle"] = rp.cycle_json(cyc, names)
        lines.append(f"discarded contradiction: {format_cycle(cyc, names)}")
    return Result(name, "fuse", True, data, lines)


# -- protocols -------------------------------------------------------------------

def run(sess: Session, script: str, name: str | None = None) -> Result:
    trace = sess.trace(script)
    events = []
    lines = [f"script {script}:"]
    for i, e in enumerate(trace.events):
        scope = "/".join(e.scope)
        ev = {"index": i, "scope": list(e.scope), "kind": e.kind, "tag": e.tag,
              "holder": e.holder, "messages": [list(m) for m in e.messages],
              "resource": rp.resource_json(e.resource),
              "cycles": [{"input": x, **rp.cycle_json(c)} for x, c in e.cycles]}
        events.append(ev)
        head = f"[{i}] {e.kind} {e.tag}" + (f" (in {scope})" if scope else "")
        if e.holder:
            head += f" -> {e.holder}"
        lines.append(head)
        for a, b, what in e.messages:
            lines.append(f"    {a} → {b}: {what}")
        lines += rp.resource_text(e.resource, "    ")
        for x, c in e.cycles:
            lines.append(f"    inconsistency at {x}: {format_cycle(c)}")
    lines.append("holdings:")
    for s in sorted(trace.holdings):
        lines.append(f"  {s}:")
        lines += rp.resource_text(trace.holdings[s], "    ")
    data = {"script": script, "events": events,
            "holdings": {s: rp.resource_json(r) for s, r in sorted(trace.holdings.items())},
            "diagnostics": len(trace.diagnostics())}
    return Result(name or script, "run", True, data, lines)


def _privacy_lines(rep) -> list:
    lines = [f"{rep.kind}: {'pass' if rep.passed else 'FAIL'}"]
    for v in rep.failures:
        lines.append(f"  at {v.label}: learned {rp.source_text(v.lhs)} not ≺ released {rp.source_text(v.rhs)}")
    return lines


def _privacy_json(rep) -> dict:
    return {"passed": rep.passed,
            "labels": [{"input": v.label, "ok": v.ok, "learned": rp.source_json(v.lhs),
                        "released": rp.source_json(v.rhs)} for v in rep.verdicts]}


def privacy(sess: Session, c: dict) -> Result:
    script = c.get("script")
    mode = c.get("mode", "both")
    phi_a = sess.resource(c["phi_a"], script)
    phi_ab = sess.resource(c["phi_ab"], script)
    data, lines, ok = {"mode": mode}, [], True
    if mode in ("local", "both"):
        rep = local_privacy_check(phi_a, phi_ab, sess.resource(c["phi_b"], script))
        data["local"] = _privacy_json(rep)
        lines += _privacy_lines(rep)
        ok &= rep.passed
    if mode in ("strong", "both"):
        rep = strong_privacy_check(phi_a, phi_ab)
        data["strong"] = _privacy_json(rep)
        lines += _privacy_lines(rep)
        # the strong requirement is reported; only the requested mode decides
        if mode == "strong":
            ok &= rep.passed
    return Result(c["name"], "privacy", ok, data, lines)


def leq(sess: Session, c: dict) -> Result:
    script = c.get("script")
    a = sess.resource(c["left"], script)
    b = sess.resource(c["right"], script)
    ok = resource_leq(a, b)
    strict = c.get("strict", False)
    if strict:
        ok = ok and not resource_leq(b, a)
    data = {"left": c["left"], "right": c["right"], "strict": strict, "holds": ok,
            "failing_inputs": failing_inputs(a, b)}
    rel = "≺ (strictly)" if strict else "≺"
    lines = [f"{c['left']} {rel} {c['right']}: {'true' if ok else 'false'}"]
    if data["failing_inputs"]:
        lines.append("  fails at " + ", ".join(data["failing_inputs"]))
    return Result(c["name"], "leq", ok, data, lines)


# -- noninterference -------------------------------------------------------------

def _verdict_json(v) -> dict:
    d = {"passed": v.passed, "method": v.method, "explored": v.explored}
    if v.witness:
        d["witness"] = [list(v.witness[0]), list(v.witness[1])]
        d["observations"] = list(v.observations)
    return d


def ni(sess: Session, c: dict, max_len: int | None = None) -> Result:
    M = sess.sc.machines[c["machine"]]
    subject = c["subject"]
    L = max_len if max_len is not None else c.get("max_len", default_bound(M))
    prod = ni_product(M, subject)
    brute = ni_bruteforce(M, subject, L)
    agree = prod.passed == brute.passed
    data = {"machine": c["machine"], "subject": subject, "max_len": L,
            "product": _verdict_json(prod), "bruteforce": _verdict_json(brute), "agree": agree}
    lines = [f"noninterference for {subject} on {c['machine']}:",
             f"  product:    {'pass' if prod.passed else 'FAIL'}",
             f"  bruteforce: {'pass' if brute.passed else 'FAIL'} (strings up to length {L})"]
    for v in (prod, brute):
        if v.witness:
            x, x2 = v.witness
            lines.append(f"  {v.method} witness: {rp.string_text(x)} vs {rp.string_text(x2)}; "
                         f"{subject} observes {v.observations[0]} vs {v.observations[1]}")
    if not agree:
        lines.append("  the two procedures disagree")
    return Result(c["name"], "ni", prod.passed and brute.passed and agree, data, lines)


def ni_forms(sess: Session, c: dict) -> Result:
    net = sess.sc.network
    phi = sess.resource(c["resource"], c.get("script"))
    s = c["subject"]
    try:
        forms = deterministic_ni_forms(phi, net.pi(s), net.rho(s), net.inputs)
    except NotDeterministic as e:
        return Result(c["name"], "ni-forms", False, {"error": str(e)}, [f"not deterministic: {e}"])
    data = {"factors": forms.factors, "square": forms.square, "fixed": forms.fixed,
            "agree": forms.agree}
    if forms.witness:
        data["witness"] = list(forms.witness)
    lines = [f"noninterference forms for {s} on {c['resource']}: "
             f"factoring={forms.factors} square={forms.square} fixed-point={forms.fixed}"]
    if forms.witness:
        lines.append(f"  inputs {forms.witness[0]} and {forms.witness[1]} look alike to {s} "
                     "but are observed differently")
    ok = forms.factors and forms.square and forms.fixed
    return Result(c["name"], "ni-forms", ok, data, lines)


def run_check(sess: Session, c: dict, max_len: int | None = None) -> Result:
    kind = c["kind"]
    if kind == "majorize":
        return majorize(sess, c["beta"], c["gamma"], c["name"])
    if kind == "consistent":
        return consistency(sess, c["set"], c["name"])
    if kind == "privacy":
        return privacy(sess, c)
    if kind == "ni":
        return ni(sess, c, max_len)
    if kind == "ni-forms":
        return ni_forms(sess, c)
    if kind == "leq":
        return leq(sess, c)
    return run(sess, c["script"], c["name"])


__all__ = ["Result", "Session", "consistency", "decompose", "fuse", "leq", "majorize",
           "ni", "ni_forms", "privacy", "run", "run_check"]
