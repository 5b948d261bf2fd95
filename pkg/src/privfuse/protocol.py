"""Resource networks, Request-Policy runs, composite scripts and privacy checks.

A script is a list of steps executed against an immutable network:

* :class:`RPStep` releases ``p . phi . r`` of a provider's resource to a
  requester, who fuses it into their holdings;
* :class:`ComposeStep` chains resources and maps in application order, for
  forwarding patterns where a request travels through intermediaries;
* :class:`FuseStep` fuses previously produced resources under a new tag;
* :class:`IncludeStep` runs another named script inline, so a composite
  protocol can embed a lower-level one as a unit.

Every produced resource is stored under its tag, and every subject's
holdings only ever grow by fusion.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field

from .errors import CastingError, DanglingTag, MalformedStep, UnknownSubject
from .lattice import find_cycle
from .majorization import is_majorized
from .resources import (
    PartialMap,
    Resource,
    apply_policy,
    apply_request,
    compose,
    resource_fusion,
    resource_meet,
)
from .weights import SourceElement


@dataclass(frozen=True)
class Casting:
    """Embedding of local identifiers into global ones, with its partial retraction."""

    embed: PartialMap
    project: PartialMap

    def __post_init__(self):
        for local, glob in self.embed.items():
            if self.project.get(glob) != local:
                raise CastingError(f"projecting the image of {local!r} does not return it")

    @classmethod
    def identity(cls, labels: Iterable) -> Casting:
        m = PartialMap.identity(labels)
        return cls(m, m)

    @property
    def locals(self) -> frozenset:
        return self.embed.domain

    @property
    def projector(self) -> PartialMap:
        """``embed . project``: idempotent partial map on global identifiers."""
        return self.project.then(self.embed)

    @property
    def visible(self) -> frozenset:
        """Global identifiers fixed by the projector."""
        return frozenset(x for x, y in self.projector.items() if x == y)


@dataclass(frozen=True)
class ResourceNetwork:
    """Subjects, global identifiers, per-subject castings and named resources.

    ``resources`` maps resource names to resources; ``owners`` maps each
    name to the subject holding it. A subject's own resource is the one
    named after the subject (empty when absent). Missing castings default
    to the identity on the corresponding universe.
    """

    subjects: tuple
    inputs: frozenset
    outputs: frozenset
    resources: Mapping = field(default_factory=dict)
    owners: Mapping = field(default_factory=dict)
    input_castings: Mapping = field(default_factory=dict)
    output_castings: Mapping = field(default_factory=dict)
    edges: frozenset = frozenset()

    def __post_init__(self):
        subjects = set(self.subjects)
        for name, owner in self.owners.items():
            if owner not in subjects:
                raise UnknownSubject(f"resource {name!r} owned by unknown subject {owner!r}")
        for s in list(self.input_castings) + list(self.output_castings):
            if s not in subjects:
                raise UnknownSubject(f"casting declared for unknown subject {s!r}")
        for s, c in self.input_castings.items():
            if not c.project.domain <= self.inputs or not c.embed.image <= self.inputs:
                raise CastingError(f"input casting of {s!r} leaves the global inputs")
        for s, c in self.output_castings.items():
            if not c.project.domain <= self.outputs or not c.embed.image <= self.outputs:
                raise CastingError(f"output casting of {s!r} leaves the global outputs")

    def subject_resource(self, s) -> Resource:
        self.require(s)
        return self.resources.get(s, Resource())

    def require(self, s):
        if s not in self.subjects:
            raise UnknownSubject(f"unknown subject {s!r}")

    def pi(self, s) -> Casting:
        self.require(s)
        return self.input_castings.get(s) or Casting.identity(self.inputs)

    def rho(self, s) -> Casting:
        self.require(s)
        return self.output_castings.get(s) or Casting.identity(self.outputs)


# -- steps ---------------------------------------------------------------------

@dataclass(frozen=True)
class RPStep:
    """``requester`` obtains ``policy . source . request`` from ``provider``.

    ``source`` names the provider's resource to use (default: the provider's
    own). ``mode`` is ``"demand"`` (requester initiates) or ``"supply"``
    (provider initiates); it only changes the order of trace messages.
    """

    requester: str
    provider: str
    request: object
    policy: object
    tag: str
    source: str | None = None
    accumulate: bool = True
    mode: str = "demand"


@dataclass(frozen=True)
class ComposeStep:
    """Compose ``factors`` (names of resources or maps) in application order."""

    tag: str
    factors: tuple
    holder: str | None = None


@dataclass(frozen=True)
class FuseStep:
    """Fuse the resources named by ``sources``; optionally add to ``holder``."""

    tag: str
    sources: tuple
    holder: str | None = None


@dataclass(frozen=True)
class IncludeStep:
    """Run the script named ``script`` inline."""

    script: str


@dataclass(frozen=True)
class ProtocolScript:
    name: str
    steps: tuple
    maps: Mapping = field(default_factory=dict)
    library: Mapping = field(default_factory=dict)  # name -> ProtocolScript, for IncludeStep


@dataclass(frozen=True)
class TraceEvent:
    scope: tuple
    kind: str
    tag: str
    resource: Resource
    messages: tuple = ()
    holder: str | None = None
    cycles: tuple = ()  # ((input, cycle), ...) where fusing into holder met an inconsistency


@dataclass
class RunTrace:
    events: list
    produced: dict
    holdings: dict

    def subtrace(self, scope: str) -> list:
        """Events run inside an included script, with that scope prefix removed."""
        out = []
        for e in self.events:
            if e.scope[:1] == (scope,):
                out.append(TraceEvent(e.scope[1:], e.kind, e.tag, e.resource,
                                      e.messages, e.holder, e.cycles))
        return out

    def diagnostics(self) -> list:
        return [(e.tag, e.holder, x, cyc) for e in self.events for x, cyc in e.cycles]


# -- execution -----------------------------------------------------------------

def _as_map(ref, script: ProtocolScript, what: str) -> PartialMap:
    if isinstance(ref, PartialMap):
        return ref
    if isinstance(ref, Mapping):
        return PartialMap(ref)
    if isinstance(ref, str):
        if ref in script.maps:
            return script.maps[ref]
        raise DanglingTag(f"{what} {ref!r} is not a declared map")
    raise MalformedStep(f"{what} must be a map or a map name, got {ref!r}")


def rp_run(step: RPStep, net: ResourceNetwork, script: ProtocolScript | None = None,
           produced: Mapping | None = None) -> Resource:
    """Outcome of one Request-Policy exchange: ``policy . phi . request``."""
    net.require(step.requester)
    net.require(step.provider)
    script = script or ProtocolScript("", ())
    if step.source is None:
        phi = net.subject_resource(step.provider)
    else:
        phi = _lookup_resource(step.source, net, produced or {})
    r = _as_map(step.request, script, "request")
    p = _as_map(step.policy, script, "policy")
    return apply_policy(p, apply_request(phi, r))


def _lookup_resource(name, net: ResourceNetwork, produced: Mapping) -> Resource:
    if name in produced:
        return produced[name]
    if name in net.resources:
        return net.resources[name]
    raise DanglingTag(f"no resource named {name!r} has been produced or declared")


def _lookup_factor(name, net, produced, script) -> Resource:
    if isinstance(name, PartialMap):
        return name.as_resource()
    if not isinstance(name, str):
        raise MalformedStep(f"factor {name!r} is neither a name nor a map")
    if name in produced or name in net.resources:
        return _lookup_resource(name, net, produced)
    if name in script.maps:
        return script.maps[name].as_resource()
    raise DanglingTag(f"factor {name!r} is not a produced tag, resource, or map")


class _Runner:
    def __init__(self, net: ResourceNetwork):
        self.net = net
        self.events: list = []
        self.produced: dict = {}
        self.holdings = {s: net.subject_resource(s) for s in net.subjects}

    def _store(self, tag, res):
        if not tag:
            raise MalformedStep("every step needs a tag")
        if tag in self.produced:
            raise MalformedStep(f"tag {tag!r} produced twice")
        self.produced[tag] = res

    def _accumulate(self, holder, res) -> tuple:
        self.net.require(holder)
        held = self.holdings[holder]
        cycles = []
        for x in sorted(held.support | res.support):
            cyc = find_cycle([held[x], res[x]])
            if cyc is not None:
                cycles.append((x, cyc))
        self.holdings[holder] = resource_fusion([held, res])
        return tuple(cycles)

    def run(self, script: ProtocolScript, scope: tuple = (), active: tuple = ()):
        if script.name in active:
            raise MalformedStep(f"script {script.name!r} includes itself")
        active = active + (script.name,)
        for step in script.steps:
            if isinstance(step, RPStep):
                if step.mode not in ("demand", "supply"):
                    raise MalformedStep(f"unknown mode {step.mode!r}")
                res = rp_run(step, self.net, script, self.produced)
                self._store(step.tag, res)
                a, b = step.requester, step.provider
                if step.mode == "demand":
                    msgs = ((a, b, "request"), (b, a, "response"))
                else:
                    msgs = ((b, a, "offer"), (a, b, "request"), (b, a, "response"))
                cycles = self._accumulate(a, res) if step.accumulate else ()
                self.events.append(TraceEvent(scope, "rp", step.tag, res, msgs,
                                              a if step.accumulate else None, cycles))
            elif isinstance(step, ComposeStep):
                if not step.factors:
                    raise MalformedStep(f"compose step {step.tag!r} has no factors")
                out = None
                for name in step.factors:
                    f = _lookup_factor(name, self.net, self.produced, script)
                    out = f if out is None else compose(f, out)
                self._store(step.tag, out)
                cycles = self._accumulate(step.holder, out) if step.holder else ()
                self.events.append(TraceEvent(scope, "compose", step.tag, out, (), step.holder, cycles))
            elif isinstance(step, FuseStep):
                if not step.sources:
                    raise MalformedStep(f"fuse step {step.tag!r} has no sources")
                parts = [_lookup_resource(n, self.net, self.produced) for n in step.sources]
                cycles = []
                for x in sorted(set().union(*(p.support for p in parts))):
                    cyc = find_cycle([p[x] for p in parts])
                    if cyc is not None:
                        cycles.append((x, cyc))
                out = resource_fusion(parts)
                self._store(step.tag, out)
                if step.holder:
                    cycles.extend(self._accumulate(step.holder, out))
                self.events.append(TraceEvent(scope, "fuse", step.tag, out, (), step.holder,
                                              tuple(cycles)))
            elif isinstance(step, IncludeStep):
                sub = script.library.get(step.script)
                if sub is None:
                    raise DanglingTag(f"included script {step.script!r} is not declared")
                if not sub.library:
                    sub = ProtocolScript(sub.name, sub.steps, sub.maps, script.library)
                self.run(sub, scope + (step.script,), active)
            else:
                raise MalformedStep(f"unknown step {step!r}")


def run_scenario(script: ProtocolScript, net: ResourceNetwork) -> RunTrace:
    """Execute ``script`` step by step; deterministic for fixed inputs."""
    runner = _Runner(net)
    runner.run(script)
    return RunTrace(runner.events, runner.produced, runner.holdings)


# -- privacy requirements --------------------------------------------------------

@dataclass(frozen=True)
class LabelVerdict:
    label: str
    lhs: SourceElement
    rhs: SourceElement
    ok: bool


@dataclass(frozen=True)
class PrivacyReport:
    kind: str
    verdicts: tuple

    @property
    def passed(self) -> bool:
        return all(v.ok for v in self.verdicts)

    @property
    def failures(self) -> tuple:
        return tuple(v for v in self.verdicts if not v.ok)


def _report(kind, lhs: Resource, released: Resource, labels) -> PrivacyReport:
    verdicts = tuple(LabelVerdict(x, lhs[x], released[x], is_majorized(lhs[x], released[x]))
                     for x in sorted(labels))
    return PrivacyReport(kind, verdicts)


def local_privacy_check(phi_a: Resource, phi_ab: Resource, phi_b: Resource) -> PrivacyReport:
    """Per input: what A can learn about B's resource stays below what B released.

    ``((phi_a fused with phi_ab) meet phi_b)[x]`` must be majorized by ``phi_ab[x]``.
    """
    learned = resource_meet([resource_fusion([phi_a, phi_ab]), phi_b])
    labels = phi_a.support | phi_ab.support | phi_b.support
    return _report("local", learned, phi_ab, labels)


def strong_privacy_check(phi_a: Resource, phi_ab: Resource) -> PrivacyReport:
    """Per input: A's fused holdings stay below what was released to A."""
    held = resource_fusion([phi_a, phi_ab])
    return _report("strong", held, phi_ab, phi_a.support | phi_ab.support)


__all__ = [
    "Casting", "ComposeStep", "FuseStep", "IncludeStep", "LabelVerdict",
    "PrivacyReport", "ProtocolScript", "RPStep", "ResourceNetwork", "RunTrace",
    "TraceEvent", "local_privacy_check", "rp_run", "run_scenario",
    "strong_privacy_check",
]
