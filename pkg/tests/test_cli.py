import json

import pytest
from click.testing import CliRunner

from privfuse.cli import main
from privfuse.scenario import bundled_fixtures

FAILING = {"elevator", "privacy_leak"}


@pytest.fixture
def cli():
    runner = CliRunner()
    return lambda *args: runner.invoke(main, list(args))


def test_consistency_order(cli):
    res = cli("consistency", "table_2_3.scn", "--set", "beta,gamma")
    assert res.exit_code == 0
    assert res.output.splitlines()[0] == "consistent; order {w}<{x}<{y}<{z}"


def test_consistency_cycle(cli):
    res = cli("consistency", "table_2_3", "--set", "beta,gamma,delta")
    assert res.exit_code == 1
    assert res.output.startswith("inconsistent; cycle ")


def test_scenario_option(cli):
    a = cli("consistency", "--scenario", "table_2_3", "--set", "BG")
    b = cli("consistency", "table_2_3", "--set", "BG")
    assert a.exit_code == 0 and a.output == b.output


def test_fuse(cli):
    res = cli("fuse", "table_2_3", "--set", "BG")
    assert res.exit_code == 0
    assert "fusion = {w: 1/10, x: 1/10, y: 3/10, z: 1/2}" in res.output


def test_majorize_and_decompose(cli):
    res = cli("majorize", "table_2_3", "beta", "gamma")
    assert res.exit_code == 0 and "reconstruction: exact" in res.output
    res = cli("decompose", "table_2_3", "beta", "gamma")
    assert res.exit_code == 0 and "total weight 1" in res.output
    res = cli("majorize", "table_2_3", "gamma", "beta")
    assert res.exit_code == 1


def test_structured_output(cli):
    res = cli("fuse", "table_2_3", "--set", "BG", "--format", "structured")
    doc = json.loads(res.output)
    assert doc["scenario"] == "table_2_3" and doc["passed"] is True
    assert doc["results"][0]["fusion"] == {"w": "1/10", "x": "1/10", "y": "3/10", "z": "1/2"}


def test_check_ni_witness(cli):
    res = cli("check-ni", "elevator")
    assert res.exit_code == 1
    assert "<> vs <call_B_2>" in res.output


def test_check_privacy(cli):
    assert cli("check-privacy", "privacy_disjoint").exit_code == 0
    res = cli("check-privacy", "privacy_leak")
    assert res.exit_code == 1 and "at x:" in res.output


@pytest.mark.parametrize("name", sorted(n[:-4] for n in bundled_fixtures()))
def test_every_fixture_runs(cli, name):
    res = cli("run", name)
    assert res.exit_code == (1 if name in FAILING else 0), res.output


def test_repeat_runs_identical(cli):
    for args in (("run", "sinf", "--format", "structured"), ("run", "crossshare"), ("check-ni", "elevator")):
        assert cli(*args).output == cli(*args).output


def test_usage_errors(cli):
    assert cli("run", "no_such_fixture").exit_code == 2
    assert cli("consistency", "table_2_3", "--set", "beta,nobody").exit_code == 2
    assert cli("run").exit_code == 2
    assert cli("run", "url", "--scenario", "url").exit_code == 2
    assert cli("fuse", "table_2_3").exit_code == 2


def test_bad_document(cli, tmp_path):
    p = tmp_path / "bad.scn"
    p.write_text('[sources]\nb = { u = "7/5" }\n')
    res = cli("run", str(p))
    assert res.exit_code == 2 and "InvariantViolation" in res.output


def test_fixtures_listing(cli):
    res = cli("fixtures")
    assert res.exit_code == 0 and "table_2_3.scn" in res.output.split()
