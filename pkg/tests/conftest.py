from __future__ import annotations

from fractions import Fraction

import pytest

from coflowsched.instance import CoflowSpec, FlowSpec, Instance

ACCEPTANCE_LINES: list[str] = []


def coflow(cid, flows=(), release=0, weight=1, preds=()):
    return CoflowSpec(cid, Fraction(weight), release, [FlowSpec(*f) for f in flows], list(preds))


def make_instance(coflows, mode="divisible", cores=1, ports=2, jobs=None) -> Instance:
    return Instance(ports, cores, list(coflows), mode, jobs)


@pytest.fixture
def two_on_one_port():
    """Coflows a (size 1) and b (size 2) both through input 0; LP optimum and best cost are 4."""
    def build(mode="single_core", cores=1):
        return make_instance([coflow("a", [(0, 0, 1)]), coflow("b", [(0, 1, 2)])], mode, cores)
    return build


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
