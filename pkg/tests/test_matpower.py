import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import gridstealth as gs
from gridstealth.cases import builtin_text, random_case
from gridstealth.errors import CaseError
from gridstealth.matpower import BusRole

TWO_BUS = """
mpc.baseMVA = 100;
mpc.bus = [
    1 3 0 0;
    2 1 0 0;
];
mpc.branch = [
    1 2 0.01 0.5 0 0 0 0 0 0 1;
];
"""


def test_two_bus():
    case = gs.parse_case(TWO_BUS)
    assert len(case.buses) == 2
    assert len(case.branches) == 1
    assert case.slack_bus == 1
    assert case.buses[1].role is BusRole.PQ
    assert case.branches[0].reactance == 0.5
    assert case.branches[0].in_service


def test_case30_counts(case30):
    assert len(case30.buses) == 30
    assert len(case30.branches) == 41
    assert case30.slack_bus == 1
    assert case30.base_mva == 100
    assert sum(b.role is BusRole.PV for b in case30.buses) == 5


def test_bus_type_codes():
    text = TWO_BUS.replace("2 1 0 0;", "2 2 0 0;")
    assert gs.parse_case(text).buses[1].role is BusRole.PV


def test_two_slack_buses():
    with pytest.raises(CaseError, match="slack bus violation"):
        gs.parse_case(TWO_BUS.replace("2 1 0 0;", "2 3 0 0;"))


def test_no_slack_bus():
    with pytest.raises(CaseError, match="slack bus violation"):
        gs.parse_case(TWO_BUS.replace("1 3 0 0;", "1 1 0 0;"))


@pytest.mark.parametrize("section", ["baseMVA", "bus", "branch"])
def test_missing_section(section):
    text = re.sub(rf"mpc\.{section} = .*?;\n" if section == "baseMVA" else rf"mpc\.{section} = \[.*?\];",
                  "", TWO_BUS, flags=re.S)
    with pytest.raises(CaseError, match="malformed case"):
        gs.parse_case(text)


def test_zero_reactance_in_service():
    with pytest.raises(CaseError, match="degenerate branch"):
        gs.parse_case(TWO_BUS.replace("0.01 0.5", "0.01 0"))


def test_zero_reactance_out_of_service_is_kept():
    case = gs.parse_case(TWO_BUS.replace("0.01 0.5 0 0 0 0 0 0 1", "0.01 0 0 0 0 0 0 0 0"))
    assert not case.branches[0].in_service


def test_dangling_branch():
    with pytest.raises(CaseError, match="unknown bus"):
        gs.parse_case(TWO_BUS.replace("1 2 0.01", "1 7 0.01"))


def test_short_branch_row():
    with pytest.raises(CaseError, match="malformed case"):
        gs.parse_case(TWO_BUS.replace("1 2 0.01 0.5 0 0 0 0 0 0 1", "1 2 0.01 0.5"))


def test_scientific_notation():
    case = gs.parse_case(TWO_BUS.replace("0.5", "5e-1").replace("100", "1.0E2"))
    assert case.branches[0].reactance == 0.5
    assert case.base_mva == 100.0


def test_out_of_service_retained(jac30):
    case = gs.load_builtin("case5")
    assert len(case.branches) == 6
    assert [br.in_service for br in case.branches].count(False) == 1


def test_round_trip_builtin():
    for name in ("case2", "case3", "case5", "case30"):
        case = gs.parse_case(builtin_text(name))
        text = gs.format_case(case)
        assert gs.parse_case(text) == case
        assert gs.format_case(gs.parse_case(text)) == text


@settings(max_examples=50, deadline=None)
@given(n_bus=st.integers(2, 12), seed=st.integers(0, 2**32 - 1))
def test_round_trip_random(n_bus, seed):
    case = random_case(n_bus, seed)
    assert gs.parse_case(gs.format_case(case)) == case


@settings(max_examples=50, deadline=None)
@given(data=st.data())
def test_comments_and_blank_lines_do_not_matter(data):
    text = builtin_text("case5")
    lines = text.splitlines()
    out = []
    for line in lines:
        out.append(line)
        extra = data.draw(st.sampled_from(["", "   ", "% a comment", "\t% 1 2 3;", None]))
        if extra is not None:
            out.append(extra)
    assert gs.parse_case("\n".join(out)) == gs.parse_case(text)
