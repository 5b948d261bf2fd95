import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from privfuse.errors import CastingError, DanglingTag, MalformedStep, UnknownSubject
from privfuse.protocol import (
    Casting, ComposeStep, FuseStep, IncludeStep, ProtocolScript, ResourceNetwork, RPStep,
    local_privacy_check, rp_run, run_scenario, strong_privacy_check,
)
from privfuse.resources import PartialMap, Resource, from_table, resource_leq
from privfuse.scenario import parse_scenario

from helpers import (
    apply_map_in, apply_map_out, oracle_compose, oracle_resource_fusion, plain, rand_resource,
)


def net_of(resources, subjects=("A", "B"), **kw):
    ins = set().union(*(r.support for r in resources.values())) if resources else set()
    outs = set().union(*(r.outputs for r in resources.values())) if resources else set()
    owners = kw.pop("owners", {n: n for n in resources})
    return ResourceNetwork(tuple(subjects), frozenset(ins), frozenset(outs), resources, owners, **kw)


def rp_formula(p, phi, r):
    return apply_map_out(dict(p), apply_map_in(plain(phi), dict(r)))


def run_fixture(name, script=None):
    sc = parse_scenario(name)
    return sc, run_scenario(sc.scripts[script or name], sc.network)


class TestCasting:
    def test_retraction_law(self):
        c = Casting(PartialMap({"a0": "a0b0"}), PartialMap({"a0b0": "a0", "a0b1": "a0"}))
        assert c.projector == PartialMap({"a0b0": "a0b0", "a0b1": "a0b0"})
        assert c.projector.then(c.projector) == c.projector
        assert c.visible == {"a0b0"}
        with pytest.raises(CastingError):
            Casting(PartialMap({"a": "g1"}), PartialMap({"g1": "b"}))

    def test_identity_default(self):
        net = net_of({"B": from_table({"x": {"y": 1}})})
        assert net.pi("A").projector == PartialMap({"x": "x"})
        assert net.rho("B").projector == PartialMap({"y": "y"})

    def test_fixture_castings_are_idempotent(self):
        for name in ("credit", "ni_forms"):
            net = parse_scenario(name).network
            for s in net.subjects:
                for c in (net.pi(s), net.rho(s)):
                    assert c.embed.then(c.project) == PartialMap.identity(c.locals)
                    assert c.projector.then(c.projector) == c.projector

    def test_bad_network(self):
        with pytest.raises(UnknownSubject):
            net_of({"B": Resource()}, owners={"B": "Q"})
        with pytest.raises(CastingError):
            net_of({"B": from_table({"x": {"y": 1}})},
                   input_castings={"A": Casting(PartialMap({"l": "zz"}), PartialMap({"zz": "l"}))})


class TestRP:
    phi_b = from_table({"x1": {"y1": "1/2", "y2": "1/4"}, "x2": {"y2": "1/3"}})

    def test_identity_maps(self):
        net = net_of({"B": self.phi_b})
        step = RPStep("A", "B", PartialMap.identity(["x1", "x2"]), PartialMap.identity(["y1", "y2"]), "AB")
        assert rp_run(step, net) == self.phi_b

    def test_empty_policy(self):
        net = net_of({"B": self.phi_b})
        assert rp_run(RPStep("A", "B", PartialMap.identity(["x1"]), PartialMap(), "AB"), net) == Resource()

    def test_unknown_subject(self):
        net = net_of({"B": self.phi_b})
        with pytest.raises(UnknownSubject):
            rp_run(RPStep("Q", "B", {}, {}, "QB"), net)

    def test_dangling_map_name(self):
        net = net_of({"B": self.phi_b})
        with pytest.raises(DanglingTag):
            rp_run(RPStep("A", "B", "nope", {}, "AB"), net)

    @given(st.integers(0, 10**6), st.dictionaries(st.sampled_from("pqr"), st.sampled_from("pqr")),
           st.dictionaries(st.sampled_from("abc"), st.sampled_from("abc")))
    def test_formula_and_support(self, seed, r, p):
        phi = rand_resource(random.Random(seed), "pqr", "abc")
        net = net_of({"B": phi})
        out = rp_run(RPStep("A", "B", PartialMap(r), PartialMap(p), "AB"), net)
        assert plain(out) == rp_formula(p, phi, r)
        assert out.outputs <= PartialMap(p).image

    def test_credit_sub_table(self):
        sc, trace = run_fixture("credit", "loan")
        agency = sc.resources["agency"]
        assert trace.produced["AB"] == Resource({"B:T0": agency["B:T0"]})
        assert trace.holdings["A"] == trace.produced["AB"]


class TestScripts:
    def test_tad_matches_formula(self):
        sc, trace = run_fixture("tad")
        m = {k: dict(v) for k, v in sc.maps.items()}
        phi_g = plain(sc.network.resources["G"])
        # phi^{ABG} = p^{AB} p^{BG} phi^G r^{BG} r^{AB}
        abg = apply_map_out(m["p_AB"], apply_map_out(m["p_BG"], apply_map_in(apply_map_in(phi_g, m["r_BG"]), m["r_AB"])))
        ab = rp_formula(m["p_AB"], sc.network.resources["B"], m["r_AB"])
        assert plain(trace.produced["ABG"]) == abg
        assert plain(trace.produced["AB"]) == ab
        expected = oracle_resource_fusion([ab, abg])
        assert plain(trace.produced["A_received"]) == expected
        assert plain(trace.holdings["A"]) == expected

    def test_snet_matches_formula(self):
        sc, trace = run_fixture("snet")
        m = {k: dict(v) for k, v in sc.maps.items()}
        parts = []
        for s, policy in (("A", "p_ZS"), ("B", "p_ZB"), ("D", "p_ZS")):
            parts.append(rp_formula(m[policy], sc.network.resources[s], m["r_ZS"]))
        zeta = oracle_resource_fusion(parts)
        assert plain(trace.produced["zeta"]) == zeta
        assert plain(trace.produced["CZ"]) == apply_map_out(m["p_CZ"], apply_map_in(zeta, m["r_CZ"]))
        assert plain(trace.holdings["C"]) == plain(trace.produced["CZ"])

    def test_sinf_embeds_snet_unchanged(self):
        _, alone = run_fixture("snet")
        sc, trace = run_fixture("sinf")
        assert trace.subtrace("snet") == alone.events
        assert trace.holdings["C"] == alone.holdings["C"]
        m = {k: dict(v) for k, v in sc.maps.items()}
        res = {k: plain(v) for k, v in sc.network.resources.items()}
        targeted = oracle_compose(plain(trace.produced["zeta"]),
                                  oracle_compose(res["Z_ad"], apply_map_in(res["T_ad"], m["r_TZ"])))
        assert plain(trace.produced["targeted"]) == targeted
        report = apply_map_out(m["p_TZ"], oracle_compose(res["Z_bu"], targeted))
        assert plain(trace.produced["TZ"]) == report
        assert trace.produced["ZT"] == from_table({"invoice": {"pay": 1}})

    def test_crossshare(self):
        sc, trace = run_fixture("crossshare", "pancakes")
        d = trace.holdings["D"]
        for tag in ("DB", "DC"):
            assert resource_leq(trace.produced[tag], d)
            assert not resource_leq(d, trace.produced[tag])
        _, alibi = run_fixture("crossshare", "alibi")
        diags = alibi.diagnostics()
        assert [(tag, holder, x) for tag, holder, x, _ in diags] == [("DC", "D", "where")]
        cyc = diags[0][3]
        assert {u for u, _ in cyc} == {"home", "park"}

    def test_supply_mode_only_changes_messages(self):
        phi = from_table({"x": {"y": "1/2"}})
        net = net_of({"B": phi})
        r, p = PartialMap({"x": "x"}), PartialMap({"y": "y"})
        t1 = run_scenario(ProtocolScript("s", (RPStep("A", "B", r, p, "AB"),)), net)
        t2 = run_scenario(ProtocolScript("s", (RPStep("A", "B", r, p, "AB", mode="supply"),)), net)
        assert t1.produced == t2.produced and t1.holdings == t2.holdings
        assert t1.events[0].messages != t2.events[0].messages

    def test_deterministic(self):
        _, a = run_fixture("sinf")
        _, b = run_fixture("sinf")
        assert a.events == b.events and a.holdings == b.holdings

    def test_malformed(self):
        net = net_of({"B": from_table({"x": {"y": 1}})})
        with pytest.raises(MalformedStep):
            run_scenario(ProtocolScript("s", (ComposeStep("c", ()),)), net)
        with pytest.raises(MalformedStep):
            run_scenario(ProtocolScript("s", (FuseStep("f", ("B",)), FuseStep("f", ("B",)))), net)
        with pytest.raises(DanglingTag):
            run_scenario(ProtocolScript("s", (FuseStep("f", ("nothing",)),)), net)
        with pytest.raises(DanglingTag):
            run_scenario(ProtocolScript("s", (IncludeStep("other"),)), net)
        loop = ProtocolScript("s", (IncludeStep("s"),))
        with pytest.raises(MalformedStep):
            run_scenario(ProtocolScript("s", loop.steps, {}, {"s": loop}), net)

    def test_holdings_grow_when_consistent(self):
        sc, trace = run_fixture("snet")
        net = sc.network
        for s in net.subjects:
            if not trace.diagnostics():
                assert resource_leq(net.subject_resource(s), trace.holdings[s])


class TestPrivacy:
    def test_disjoint_passes(self):
        sc, trace = run_fixture("privacy_disjoint", "ask")
        rep = local_privacy_check(sc.network.resources["A"], trace.produced["AB"], sc.network.resources["B"])
        assert rep.passed and rep.kind == "local"

    def test_planted_leak_fails_with_witness(self):
        sc, trace = run_fixture("privacy_leak", "ask")
        rep = local_privacy_check(sc.network.resources["A"], trace.produced["AB"], sc.network.resources["B"])
        assert not rep.passed
        (bad,) = rep.failures
        assert bad.label == "x"
        assert bad.lhs == sc.resources["b_table"]["x"]
        assert bad.rhs == from_table({"x": {"y1": "1/2"}})["x"]

    def test_empty_holder(self):
        phi_b = from_table({"x": {"a": "1/2", "b": "1/4"}})
        phi_ab = from_table({"x": {"a": "1/2"}})
        assert local_privacy_check(Resource(), phi_ab, phi_b).passed
        assert strong_privacy_check(Resource(), phi_ab).passed
        assert strong_privacy_check(phi_ab, phi_ab).passed

    def test_strong_fails_on_side_information(self):
        side = from_table({"q": {"a": "1/2"}})
        phi_ab = from_table({"x": {"a": "1/2"}})
        rep = strong_privacy_check(side, phi_ab)
        assert not rep.passed and [v.label for v in rep.failures] == ["q"]

    @given(st.integers(0, 10**6))
    def test_strong_implies_local(self, seed):
        rng = random.Random(seed)
        a, ab, b = (rand_resource(rng, "pq", "abc") for _ in range(3))
        if strong_privacy_check(a, ab).passed:
            assert local_privacy_check(a, ab, b).passed
