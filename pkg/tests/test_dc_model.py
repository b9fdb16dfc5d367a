import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import gridstealth as gs
from gridstealth.cases import random_case
from gridstealth.errors import CaseError
from gridstealth.matpower import BranchRecord, BusRecord, BusRole, CaseFile


def incidence_oracle(case):
    """H from the branch-bus incidence matrix: B = A^T D A, flows = D A."""
    ids = case.bus_ids
    col = {b: i for i, b in enumerate(ids)}
    branches = case.in_service_branches
    A = np.zeros((len(branches), len(ids)))
    for r, br in enumerate(branches):
        A[r, col[br.from_bus]] = 1.0
        A[r, col[br.to_bus]] = -1.0
    D = np.diag([1.0 / br.reactance for br in branches])
    full = np.vstack([A.T @ D @ A, D @ A])
    return np.delete(full, col[case.slack_bus], axis=1)


def test_two_bus_hand_computed(jac2):
    np.testing.assert_array_equal(jac2.matrix, [[-2.0], [2.0], [-2.0]])
    assert [m.label for m in jac2.row_meta] == ["inj:1", "inj:2", "flow:1-2"]
    assert jac2.state_buses == (2,)
    assert jac2.slack_bus == 1


def test_case30_shape_and_rank(jac30):
    assert jac30.matrix.shape == (71, 29)
    assert np.linalg.matrix_rank(jac30.matrix) == 29


def test_case30_matches_incidence_oracle(case30, jac30):
    np.testing.assert_allclose(jac30.matrix, incidence_oracle(case30), rtol=1e-14, atol=1e-12)


def test_injection_rows_sum_to_zero_with_slack_column(jac30):
    full = jac30.full_matrix()
    np.testing.assert_allclose(full.sum(axis=1), 0.0, atol=1e-10)


def test_out_of_service_branch_islands_two_bus():
    case = CaseFile(100.0, (BusRecord(1, BusRole.SLACK), BusRecord(2, BusRole.PQ)),
                    (BranchRecord(1, 2, 0.5, in_service=False),))
    with pytest.raises(CaseError, match="islanded network"):
        gs.build_jacobian(case)


def test_single_bus_is_degenerate():
    case = CaseFile(100.0, (BusRecord(1, BusRole.SLACK),), ())
    with pytest.raises(CaseError, match="degenerate system"):
        gs.build_jacobian(case)


def test_out_of_service_branch_dropped_from_rows():
    jac = gs.build_jacobian(gs.load_builtin("case5"))
    assert jac.matrix.shape == (5 + 5, 4)
    assert all(m.buses != (4, 5) for m in jac.row_meta)


def test_slack_not_first_bus():
    jac = gs.build_jacobian(gs.load_builtin("case5"))
    assert jac.slack_bus == 4
    assert jac.state_buses == (1, 2, 3, 5)


@settings(max_examples=40, deadline=None)
@given(n_bus=st.integers(2, 10), seed=st.integers(0, 2**32 - 1))
def test_injections_are_signed_sums_of_flows(n_bus, seed):
    case = random_case(n_bus, seed)
    jac = gs.build_jacobian(case)
    n = len(case.buses)
    inj, flows = jac.matrix[:n], jac.matrix[n:]
    for i, bus in enumerate(case.bus_ids):
        total = np.zeros(jac.N)
        for r, meta in enumerate(jac.row_meta[n:]):
            f, t = meta.buses
            if f == bus:
                total += flows[r]
            elif t == bus:
                total -= flows[r]
        np.testing.assert_allclose(inj[i], total, atol=1e-9)
    np.testing.assert_allclose(jac.matrix, incidence_oracle(case), atol=1e-9)
    assert np.linalg.matrix_rank(jac.matrix) == jac.N


def test_rank_of_shipped_fixtures():
    for name in ("case2", "case3", "case5", "case30"):
        jac = gs.build_jacobian(gs.load_builtin(name))
        assert np.linalg.matrix_rank(jac.matrix) == jac.N


def test_export_csv(tmp_path, jac2):
    path = tmp_path / "h.csv"
    gs.export_csv(jac2, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "measurement,theta:2"
    assert lines[1] == "inj:1,-2.0"
    assert len(lines) == 4
