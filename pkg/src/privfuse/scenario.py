"""Scenario documents: TOML files describing sources, resources, networks,
scripts, machines and the checks to run on them.

Decimal literals are read as exact rationals, and weights may also be given
as ``"p/q"`` strings. The document shape is checked against
:data:`SCHEMA` first; cross-references and value invariants afterwards.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources as importlib_resources
from pathlib import Path

import jsonschema

from .errors import (
    InvariantViolation,
    ParseError,
    PrivfuseError,
    ScenarioError,
    UnresolvedReference,
)
from .noninterference import ActionAlphabet, SharedMachine, counter_machine, elevator
from .protocol import (
    Casting,
    ComposeStep,
    FuseStep,
    IncludeStep,
    ProtocolScript,
    ResourceNetwork,
    RPStep,
)
from .resources import PartialMap, Resource
from .weights import SourceElement, as_weight

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


_WEIGHT = {"anyOf": [{"type": "number", "minimum": 0},
                     {"type": "string", "pattern": r"^\s*\d+(\s*/\s*\d+|\.\d*)?\s*$"}]}
_ROW = {"type": "object", "additionalProperties": _WEIGHT}
_NAMES = {"type": "array", "items": {"type": "string"}}
_PAIRS = {"type": "object", "additionalProperties": {"type": "string"}}

_STEP = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["rp", "compose", "fuse", "include"]},
        "requester": {"type": "string"}, "provider": {"type": "string"},
        "request": {"type": "string"}, "policy": {"type": "string"},
        "tag": {"type": "string"}, "source": {"type": "string"},
        "accumulate": {"type": "boolean"}, "mode": {"enum": ["demand", "supply"]},
        "factors": _NAMES, "sources": _NAMES, "holder": {"type": "string"},
        "script": {"type": "string"},
    },
    "additionalProperties": False,
    "allOf": [
        {"if": {"properties": {"kind": {"const": "rp"}}},
         "then": {"required": ["requester", "provider", "request", "policy", "tag"]}},
        {"if": {"properties": {"kind": {"const": "compose"}}},
         "then": {"required": ["tag", "factors"]}},
        {"if": {"properties": {"kind": {"const": "fuse"}}},
         "then": {"required": ["tag", "sources"]}},
        {"if": {"properties": {"kind": {"const": "include"}}},
         "then": {"required": ["script"]}},
    ],
}

_CHECK = {
    "type": "object",
    "required": ["name", "kind"],
    "properties": {
        "name": {"type": "string"},
        "kind": {"enum": ["majorize", "consistent", "privacy", "ni", "ni-forms", "leq", "run"]},
        "beta": {"type": "string"}, "gamma": {"type": "string"},
        "set": {"anyOf": [{"type": "string"}, _NAMES]},
        "mode": {"enum": ["local", "strong", "both"]},
        "script": {"type": "string"},
        "phi_a": {"type": "string"}, "phi_ab": {"type": "string"}, "phi_b": {"type": "string"},
        "machine": {"type": "string"}, "subject": {"type": "string"},
        "max_len": {"type": "integer", "minimum": 0},
        "resource": {"type": "string"},
        "left": {"type": "string"}, "right": {"type": "string"}, "strict": {"type": "boolean"},
    },
    "additionalProperties": False,
}

_MACHINE = {
    "type": "object",
    "properties": {
        "builtin": {"enum": ["elevator", "counter"]},
        "floors": {"type": "integer", "minimum": 1},
        "modulus": {"type": "integer", "minimum": 1},
        "subjects": _NAMES,
        "states": _NAMES,
        "initial": {"type": "string"},
        "actions": {"type": "object", "additionalProperties": _NAMES},
        "transitions": {"type": "object", "additionalProperties": _PAIRS},
        "observe": {"type": "object", "additionalProperties": _PAIRS},
    },
    "additionalProperties": False,
}

SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "privfuse scenario",
    "type": "object",
    "properties": {
        "meta": {"type": "object", "properties": {"name": {"type": "string"},
                                                  "description": {"type": "string"}}},
        "sources": {"type": "object", "additionalProperties": _ROW},
        "sets": {"type": "object", "additionalProperties": _NAMES},
        "resources": {"type": "object", "additionalProperties": {
            "type": "object", "additionalProperties": _ROW}},
        "maps": {"type": "object", "additionalProperties": {"anyOf": [
            _PAIRS, {"enum": ["identity:inputs", "identity:outputs", "empty"]}]}},
        "network": {
            "type": "object",
            "required": ["subjects"],
            "properties": {
                "subjects": _NAMES, "inputs": _NAMES, "outputs": _NAMES,
                "edges": {"type": "array", "items": {
                    "type": "array", "items": {"type": "string"}, "minItems": 2, "maxItems": 2}},
                "own": _PAIRS,
                "extra": {"type": "object", "additionalProperties": {
                    "type": "object", "required": ["owner", "resource"],
                    "properties": {"owner": {"type": "string"}, "resource": {"type": "string"}},
                    "additionalProperties": False}},
                "castings": {"type": "object", "additionalProperties": {
                    "type": "object",
                    "properties": {"inputs": _PAIRS, "input_project": _PAIRS,
                                   "outputs": _PAIRS, "output_project": _PAIRS},
                    "additionalProperties": False}},
            },
            "additionalProperties": False,
        },
        "scripts": {"type": "object", "additionalProperties": {
            "type": "object", "required": ["steps"],
            "properties": {"steps": {"type": "array", "items": _STEP},
                           "description": {"type": "string"}},
            "additionalProperties": False}},
        "machines": {"type": "object", "additionalProperties": _MACHINE},
        "checks": {"type": "array", "items": _CHECK},
    },
    "additionalProperties": False,
}


@dataclass
class Scenario:
    name: str = ""
    description: str = ""
    sources: dict = field(default_factory=dict)
    sets: dict = field(default_factory=dict)
    resources: dict = field(default_factory=dict)
    maps: dict = field(default_factory=dict)
    network: ResourceNetwork | None = None
    scripts: dict = field(default_factory=dict)
    machines: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)

    def source_set(self, ref) -> list:
        """Resolve a set name, a comma-separated list, or a list of source names."""
        if isinstance(ref, str):
            if ref in self.sets:
                names = self.sets[ref]
            else:
                names = [n.strip() for n in ref.split(",") if n.strip()]
        else:
            names = list(ref)
        if not names:
            raise UnresolvedReference("empty set of sources")
        for n in names:
            if n not in self.sources:
                raise UnresolvedReference(f"unknown source {n!r}")
        return names

    def check(self, name) -> dict:
        for c in self.checks:
            if c["name"] == name:
                return c
        raise UnresolvedReference(f"no check named {name!r}")


# -- loading -------------------------------------------------------------------

BUNDLED = "fixtures"


def bundled_fixtures() -> list:
    root = importlib_resources.files("privfuse") / BUNDLED
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".scn"))


def resolve_path(path) -> Path:
    """A filesystem path, or the name of a bundled fixture (with or without ``.scn``)."""
    p = Path(path)
    if p.exists():
        return p
    name = p.name if p.name.endswith(".scn") else p.name + ".scn"
    bundled = importlib_resources.files("privfuse") / BUNDLED / name
    if bundled.is_file():
        return Path(str(bundled))
    raise ParseError(f"no such scenario file or bundled fixture: {path}")


def parse_scenario(path) -> Scenario:
    p = resolve_path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(f"cannot read {p}: {e.strerror}") from None
    return loads(text, name=p.stem)


def loads(text: str, name: str = "") -> Scenario:
    try:
        doc = tomllib.loads(text, parse_float=Fraction)
    except tomllib.TOMLDecodeError as e:
        raise ParseError(getattr(e, "msg", str(e)), getattr(e, "lineno", None),
                         getattr(e, "colno", None)) from None
    return from_document(doc, name)


def _locate(err) -> str:
    path = "/".join(str(p) for p in err.absolute_path)
    return f"at /{path}: " if path else ""


def from_document(doc: dict, name: str = "") -> Scenario:
    validator = jsonschema.Draft7Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        e = errors[0]
        raise ParseError(f"schema: {_locate(e)}{e.message}")
    try:
        return _build(doc, name)
    except ScenarioError:
        raise
    except PrivfuseError as e:
        raise InvariantViolation(str(e)) from None
    except ValueError as e:
        raise InvariantViolation(str(e)) from None


def _source(row: dict, where: str) -> SourceElement:
    try:
        return SourceElement({k: as_weight(v) for k, v in row.items()})
    except (ValueError, ZeroDivisionError) as e:
        raise InvariantViolation(f"{where}: {e}") from None


def _build(doc: dict, name: str) -> Scenario:
    meta = doc.get("meta", {})
    sc = Scenario(name=meta.get("name", name), description=meta.get("description", ""))
    for n, row in doc.get("sources", {}).items():
        sc.sources[n] = _source(row, f"source {n!r}")
    for n, members in doc.get("sets", {}).items():
        sc.sets[n] = list(members)
        sc.source_set(members)
    for n, table in doc.get("resources", {}).items():
        sc.resources[n] = Resource({x: _source(row, f"resource {n!r} row {x!r}")
                                    for x, row in table.items()})
    if "network" in doc:
        sc.network = _network(doc["network"], sc)
    for n, spec in doc.get("maps", {}).items():
        sc.maps[n] = _map(spec, sc, n)
    library = {}
    for n, spec in doc.get("scripts", {}).items():
        library[n] = [_step(s) for s in spec["steps"]]
    scripts = {}
    for n, steps in library.items():
        scripts[n] = ProtocolScript(n, tuple(steps), sc.maps)
    for n in scripts:
        scripts[n] = ProtocolScript(n, scripts[n].steps, sc.maps, scripts)
    sc.scripts = scripts
    for n in scripts:
        _check_script(sc, n)
    for n, spec in doc.get("machines", {}).items():
        sc.machines[n] = _machine(spec, n)
    names = set()
    for c in doc.get("checks", []):
        if c["name"] in names:
            raise InvariantViolation(f"check {c['name']!r} declared twice")
        names.add(c["name"])
        _check_refs(sc, c)
        sc.checks.append(dict(c))
    return sc


def _map(spec, sc: Scenario, n) -> PartialMap:
    if spec == "empty":
        return PartialMap()
    if spec in ("identity:inputs", "identity:outputs"):
        if sc.network is None:
            raise UnresolvedReference(f"map {n!r} needs a network for {spec}")
        labels = sc.network.inputs if spec.endswith("inputs") else sc.network.outputs
        return PartialMap.identity(sorted(labels))
    return PartialMap(spec)


def _casting(embed, project, universe, what) -> Casting:
    embed = PartialMap(embed or {})
    project = PartialMap(project) if project is not None else PartialMap({g: l for l, g in embed.items()})
    if not embed.image <= universe or not project.domain <= universe:
        raise InvariantViolation(f"{what} refers to identifiers outside the global universe")
    return Casting(embed, project)


def _network(spec: dict, sc: Scenario) -> ResourceNetwork:
    subjects = tuple(spec["subjects"])
    if len(set(subjects)) != len(subjects):
        raise InvariantViolation("repeated subject")
    resources, owners = {}, {}
    for s, ref in spec.get("own", {}).items():
        if s not in subjects:
            raise UnresolvedReference(f"own resource for unknown subject {s!r}")
        if ref not in sc.resources:
            raise UnresolvedReference(f"unknown resource {ref!r} for subject {s!r}")
        resources[s], owners[s] = sc.resources[ref], s
    for n, e in spec.get("extra", {}).items():
        if e["owner"] not in subjects:
            raise UnresolvedReference(f"resource {n!r} owned by unknown subject {e['owner']!r}")
        if e["resource"] not in sc.resources:
            raise UnresolvedReference(f"unknown resource {e['resource']!r}")
        if n in resources:
            raise InvariantViolation(f"network resource {n!r} declared twice")
        resources[n], owners[n] = sc.resources[e["resource"]], e["owner"]
    inputs = set(spec.get("inputs", ()))
    outputs = set(spec.get("outputs", ()))
    for r in resources.values():
        inputs |= r.support
        outputs |= r.outputs
    pis, rhos = {}, {}
    for s, c in spec.get("castings", {}).items():
        if s not in subjects:
            raise UnresolvedReference(f"casting for unknown subject {s!r}")
        if "inputs" in c or "input_project" in c:
            pis[s] = _casting(c.get("inputs"), c.get("input_project"), inputs, f"input casting of {s!r}")
        if "outputs" in c or "output_project" in c:
            rhos[s] = _casting(c.get("outputs"), c.get("output_project"), outputs, f"output casting of {s!r}")
    edges = set()
    for a, b in spec.get("edges", ()):
        if a not in subjects or b not in subjects:
            raise UnresolvedReference(f"edge {a}-{b} names an unknown subject")
        edges.add((a, b))
    return ResourceNetwork(subjects, frozenset(inputs), frozenset(outputs), resources, owners,
                           pis, rhos, frozenset(edges))


def _step(s: dict):
    kind = s["kind"]
    if kind == "rp":
        return RPStep(s["requester"], s["provider"], s["request"], s["policy"], s["tag"],
                      s.get("source"), s.get("accumulate", True), s.get("mode", "demand"))
    if kind == "compose":
        return ComposeStep(s["tag"], tuple(s["factors"]), s.get("holder"))
    if kind == "fuse":
        return FuseStep(s["tag"], tuple(s["sources"]), s.get("holder"))
    return IncludeStep(s["script"])


def _script_tags(sc: Scenario, name: str, tags: set, active: tuple):
    """Walk a script statically, checking references and collecting produced tags."""
    if name in active:
        raise InvariantViolation(f"script {name!r} includes itself")
    script = sc.scripts[name]
    net = sc.network
    known = set(net.resources) if net else set()
    for step in script.steps:
        if isinstance(step, IncludeStep):
            if step.script not in sc.scripts:
                raise UnresolvedReference(f"script {name!r} includes unknown script {step.script!r}")
            _script_tags(sc, step.script, tags, active + (name,))
            continue
        if net is None:
            raise UnresolvedReference(f"script {name!r} needs a network")
        if isinstance(step, RPStep):
            for s in (step.requester, step.provider):
                if s not in net.subjects:
                    raise UnresolvedReference(f"step {step.tag!r} names unknown subject {s!r}")
            for m in (step.request, step.policy):
                if m not in sc.maps:
                    raise UnresolvedReference(f"step {step.tag!r} uses unknown map {m!r}")
            if step.source is not None and step.source not in tags | known:
                raise UnresolvedReference(f"step {step.tag!r} reads unknown resource {step.source!r}")
        elif isinstance(step, ComposeStep):
            for f in step.factors:
                if f not in tags | known | set(sc.maps):
                    raise UnresolvedReference(f"step {step.tag!r} uses unknown factor {f!r}")
        elif isinstance(step, FuseStep):
            for f in step.sources:
                if f not in tags | known:
                    raise UnresolvedReference(f"step {step.tag!r} fuses unknown resource {f!r}")
        holder = getattr(step, "holder", None)
        if holder is not None and holder not in net.subjects:
            raise UnresolvedReference(f"step {step.tag!r} delivers to unknown subject {holder!r}")
        if step.tag in tags:
            raise InvariantViolation(f"tag {step.tag!r} produced twice in script {name!r}")
        tags.add(step.tag)


def _check_script(sc: Scenario, name: str) -> set:
    tags: set = set()
    _script_tags(sc, name, tags, ())
    return tags


def _machine(spec: dict, n) -> SharedMachine:
    if "builtin" in spec:
        subjects = tuple(spec.get("subjects", ("A", "B")))
        if spec["builtin"] == "elevator":
            return elevator(spec.get("floors", 3), subjects)
        return counter_machine(spec.get("modulus", 3), subjects)
    for key in ("states", "initial", "actions", "transitions", "observe"):
        if key not in spec:
            raise ParseError(f"schema: at /machines/{n}: '{key}' is a required property")
    alphabet = ActionAlphabet({s: set(a) for s, a in spec["actions"].items()})
    delta = {}
    for q, row in spec["transitions"].items():
        for a, t in row.items():
            delta[(q, a)] = t
    return SharedMachine(tuple(spec["states"]), spec["initial"], alphabet, delta,
                         {s: dict(o) for s, o in spec["observe"].items()})


def _resource_ref_ok(sc: Scenario, ref: str, tags: set) -> bool:
    if ref.startswith("holdings."):
        return sc.network is not None and ref.split(".", 1)[1] in sc.network.subjects
    net_names = set(sc.network.resources) if sc.network else set()
    return ref in sc.resources or ref in net_names or ref in tags


def _check_refs(sc: Scenario, c: dict):
    kind, name = c["kind"], c["name"]

    def need(*keys):
        for k in keys:
            if k not in c:
                raise ParseError(f"schema: check {name!r} of kind {kind!r} needs '{k}'")

    tags: set = set()
    if "script" in c:
        if c["script"] not in sc.scripts:
            raise UnresolvedReference(f"check {name!r} runs unknown script {c['script']!r}")
        tags = _check_script(sc, c["script"])
    if kind == "majorize":
        need("beta", "gamma")
        sc.source_set([c["beta"], c["gamma"]])
    elif kind == "consistent":
        need("set")
        sc.source_set(c["set"])
    elif kind == "privacy":
        need("phi_a", "phi_ab")
        refs = [c["phi_a"], c["phi_ab"]]
        if c.get("mode", "both") != "strong":
            need("phi_b")
            refs.append(c["phi_b"])
        for r in refs:
            if not _resource_ref_ok(sc, r, tags):
                raise UnresolvedReference(f"check {name!r} refers to unknown resource {r!r}")
    elif kind == "ni":
        need("machine", "subject")
        if c["machine"] not in sc.machines:
            raise UnresolvedReference(f"check {name!r} refers to unknown machine {c['machine']!r}")
        if c["subject"] not in sc.machines[c["machine"]].alphabet.subjects:
            raise UnresolvedReference(f"check {name!r} names unknown subject {c['subject']!r}")
    elif kind == "ni-forms":
        need("resource", "subject")
        if sc.network is None or c["subject"] not in sc.network.subjects:
            raise UnresolvedReference(f"check {name!r} needs subject {c['subject']!r} in the network")
        if not _resource_ref_ok(sc, c["resource"], tags):
            raise UnresolvedReference(f"check {name!r} refers to unknown resource {c['resource']!r}")
    elif kind == "leq":
        need("left", "right")
        for r in (c["left"], c["right"]):
            if not _resource_ref_ok(sc, r, tags):
                raise UnresolvedReference(f"check {name!r} refers to unknown resource {r!r}")
    elif kind == "run":
        need("script")


__all__ = ["SCHEMA", "Scenario", "bundled_fixtures", "from_document", "loads",
           "parse_scenario", "resolve_path"]
