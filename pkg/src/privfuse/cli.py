"""Command-line front end.

Exit status: 0 when every requested check holds, 1 when one fails, 2 for
usage errors and unreadable or invalid scenario files.
"""

from __future__ import annotations

import sys

import click

from . import analysis
from . import report as rp
from .errors import PrivfuseError, ScenarioError
from .scenario import bundled_fixtures, parse_scenario

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Ctx:
    def __init__(self, fmt: str):
        self.fmt = fmt


def _load(scenario):
    if scenario is None:
        raise click.UsageError("no scenario given (use --scenario PATH or a positional path)")
    try:
        return analysis.Session(parse_scenario(scenario))
    except ScenarioError as e:
        click.echo(f"error: {type(e).__name__}: {e}", err=True)
        sys.exit(EXIT_USAGE)


def _emit(fmt: str, sess, command: str, results: list):
    passed = all(r.passed for r in results)
    if fmt == "structured":
        doc = {"scenario": sess.sc.name, "command": command, "passed": passed,
               "results": [r.as_json() for r in results]}
        click.echo(rp.dumps(doc), nl=False)
    else:
        for i, r in enumerate(results):
            if len(results) > 1:
                if i:
                    click.echo("")
                click.echo(f"== {r.name} ({r.kind}): {'pass' if r.passed else 'FAIL'}")
            for line in r.lines:
                click.echo(line)
    sys.exit(EXIT_OK if passed else EXIT_FAIL)


def _guard(fn, *args, **kwargs):
    """Map reference and value errors raised during analysis to exit status 2."""
    try:
        return fn(*args, **kwargs)
    except (PrivfuseError, KeyError) as e:
        click.echo(f"error: {type(e).__name__}: {e}", err=True)
        sys.exit(EXIT_USAGE)


def _scenario_opts(f):
    f = click.option("--format", "fmt", type=click.Choice(["text", "structured"]), default="text",
                     show_default=True, help="Human-readable text or a JSON document.")(f)
    f = click.option("--scenario", "scenario_opt", metavar="PATH",
                     help="Scenario file or bundled fixture name.")(f)
    return f


def _pick(scenario_opt, positional):
    if scenario_opt and positional:
        raise click.UsageError("scenario given both as --scenario and positionally")
    return scenario_opt or positional


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
def main():
    """Majorization lattice, resource fusion and privacy-protocol analysis."""


@main.command()
def fixtures():
    """List the bundled scenario fixtures."""
    for name in bundled_fixtures():
        click.echo(name)


@main.command()
@click.argument("scenario", required=False)
@_scenario_opts
@click.option("--set", "set_ref", required=True, help="Set name or comma-separated source names.")
def fuse(scenario, scenario_opt, fmt, set_ref):
    """Print the fusion of a set of sources and its flattened members."""
    sess = _load(_pick(scenario_opt, scenario))
    _emit(fmt, sess, "fuse", [_guard(analysis.fuse, sess, set_ref)])


@main.command()
@click.argument("scenario", required=False)
@_scenario_opts
@click.option("--set", "set_ref", required=True, help="Set name or comma-separated source names.")
def consistency(scenario, scenario_opt, fmt, set_ref):
    """Print consistency classes, their order, and a cycle when inconsistent."""
    sess = _load(_pick(scenario_opt, scenario))
    _emit(fmt, sess, "consistency", [_guard(analysis.consistency, sess, set_ref)])


def _pair_command(name, fn, doc):
    @main.command(name=name, help=doc)
    @click.argument("args", nargs=-1, required=True)
    @_scenario_opts
    def cmd(args, scenario_opt, fmt):
        if len(args) == 3:
            scenario, beta, gamma = args
        elif len(args) == 2:
            scenario, (beta, gamma) = None, args
        else:
            raise click.UsageError("expected [SCENARIO] BETA GAMMA")
        sess = _load(_pick(scenario_opt, scenario))
        _emit(fmt, sess, name, [_guard(fn, sess, beta, gamma)])
    return cmd


_pair_command("majorize", analysis.majorize,
              "Decide BETA ≺ GAMMA and print a substochastic witness.")
_pair_command("decompose", analysis.decompose,
              "Print partial permutations and weights carrying GAMMA↓ to BETA↓.")


def _checks_of(sess, kinds, name):
    if name:
        c = _guard(sess.sc.check, name)
        if c["kind"] not in kinds:
            raise click.UsageError(f"check {name!r} is of kind {c['kind']!r}")
        return [c]
    return [c for c in sess.sc.checks if c["kind"] in kinds]


@main.command()
@click.argument("scenario", required=False)
@_scenario_opts
@click.option("--script", help="Only run this script and print its trace.")
@click.option("--check", "check_name", help="Only evaluate this check.")
@click.option("--max-len", type=click.IntRange(min=0), help="String length bound for noninterference.")
def run(scenario, scenario_opt, fmt, script, check_name, max_len):
    """Run scripts and evaluate the scenario's checks."""
    sess = _load(_pick(scenario_opt, scenario))
    results = []
    if script:
        results.append(_guard(analysis.run, sess, script))
    elif check_name:
        results.append(_guard(analysis.run_check, sess, _guard(sess.sc.check, check_name), max_len))
    else:
        for s in sess.sc.scripts:
            results.append(_guard(analysis.run, sess, s))
        for c in sess.sc.checks:
            results.append(_guard(analysis.run_check, sess, c, max_len))
    _emit(fmt, sess, "run", results)


@main.command("check-privacy")
@click.argument("scenario", required=False)
@_scenario_opts
@click.option("--check", "check_name", help="Only evaluate this check.")
def check_privacy(scenario, scenario_opt, fmt, check_name):
    """Evaluate the local and strong privacy requirements."""
    sess = _load(_pick(scenario_opt, scenario))
    checks = _checks_of(sess, {"privacy"}, check_name)
    if not checks:
        raise click.UsageError("scenario declares no privacy checks")
    _emit(fmt, sess, "check-privacy", [_guard(analysis.privacy, sess, c) for c in checks])


@main.command("check-ni")
@click.argument("scenario", required=False)
@_scenario_opts
@click.option("--check", "check_name", help="Only evaluate this check.")
@click.option("--max-len", type=click.IntRange(min=0), help="String length bound for the brute-force search.")
def check_ni(scenario, scenario_opt, fmt, check_name, max_len):
    """Run both noninterference procedures and compare them."""
    sess = _load(_pick(scenario_opt, scenario))
    checks = _checks_of(sess, {"ni", "ni-forms"}, check_name)
    if not checks:
        raise click.UsageError("scenario declares no noninterference checks")
    _emit(fmt, sess, "check-ni", [_guard(analysis.run_check, sess, c, max_len) for c in checks])


if __name__ == "__main__":  # pragma: no cover
    main()
