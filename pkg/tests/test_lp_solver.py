import itertools

import numpy as np
import pytest

from codesign_utils import ConfigurationError
from lp_solver import (INFEASIBLE, OPTIMAL, UNBOUNDED, DenseRevisedSimplex, LinearProgram, ScipyHighsSolver,
                       get_solver, solve_lp, write_lp_file)


def vertex_enumeration(c, A_ub, b_ub, upper):
    """Best vertex of {A_ub x <= b_ub, 0 <= x <= upper} by brute force over active sets."""
    n = len(c)
    G = np.vstack([A_ub, np.eye(n), -np.eye(n)])
    h = np.concatenate([b_ub, upper, np.zeros(n)])
    best = np.inf
    for rows in itertools.combinations(range(G.shape[0]), n):
        M = G[list(rows)]
        if abs(np.linalg.det(M)) < 1e-10:
            continue
        x = np.linalg.solve(M, h[list(rows)])
        if np.all(G @ x <= h + 1e-9):
            best = min(best, float(c @ x))
    return best


def beale():
    """Classic instance on which textbook pivoting cycles; optimum -1/20."""
    c = np.array([-0.75, 150.0, -0.02, 6.0])
    A_ub = np.array([[0.25, -60.0, -0.04, 9.0],
                     [0.5, -90.0, -0.02, 3.0],
                     [0.0, 0.0, 1.0, 0.0]])
    return LinearProgram(c, A_ub, np.array([0.0, 0.0, 1.0]), name="beale")


class TestDenseRevisedSimplex:
    def test_single_lower_bound(self):
        # min x s.t. x >= 3
        result = solve_lp(LinearProgram(np.array([1.0]), np.array([[-1.0]]), np.array([-3.0])))
        assert result.status == OPTIMAL
        assert result.x[0] == pytest.approx(3.0)
        assert result.objective == pytest.approx(3.0)

    @pytest.mark.parametrize("bland_after", [1, 50])
    def test_degenerate_instance_terminates(self, bland_after):
        result = DenseRevisedSimplex(bland_after=bland_after).solve(beale())
        assert result.status == OPTIMAL
        assert result.objective == pytest.approx(-0.05, abs=1e-9)

    def test_equality_rows(self):
        # min x1 + 2 x2 s.t. x1 + x2 = 4, x1 <= 3
        lp = LinearProgram(np.array([1.0, 2.0]), A_eq=np.array([[1.0, 1.0]]), b_eq=np.array([4.0]),
                           upper=np.array([3.0, np.inf]))
        result = solve_lp(lp)
        assert result.ok
        assert result.x == pytest.approx([3.0, 1.0])
        assert result.objective == pytest.approx(5.0)

    def test_redundant_equalities(self):
        lp = LinearProgram(np.array([1.0, 1.0]), A_eq=np.array([[1.0, 1.0], [2.0, 2.0], [1.0, -1.0]]),
                           b_eq=np.array([2.0, 4.0, 0.0]))
        result = solve_lp(lp)
        assert result.ok
        assert result.x == pytest.approx([1.0, 1.0])

    def test_infeasible(self):
        lp = LinearProgram(np.array([1.0]), np.array([[-1.0], [1.0]]), np.array([-3.0, 2.0]))
        assert solve_lp(lp).status == INFEASIBLE

    def test_unbounded(self):
        lp = LinearProgram(np.array([-1.0]), np.array([[-1.0]]), np.array([-1.0]))
        assert solve_lp(lp).status == UNBOUNDED

    def test_deterministic(self, rng):
        A = rng.random((6, 8))
        lp = LinearProgram(-rng.random(8), A, np.ones(6))
        first, second = solve_lp(lp), solve_lp(lp)
        assert np.array_equal(first.x, second.x)
        assert first.iterations == second.iterations

    def test_random_lps_match_vertex_enumeration(self, rng):
        for _ in range(30):
            n = int(rng.integers(2, 5))
            m = int(rng.integers(1, 5))
            c = rng.normal(size=n)
            A = rng.normal(size=(m, n))
            b = rng.random(m) + 0.1
            upper = rng.integers(1, 5, size=n).astype(float)
            result = solve_lp(LinearProgram(c, A, b, upper=upper))
            assert result.status == OPTIMAL
            assert result.objective == pytest.approx(vertex_enumeration(c, A, b, upper), abs=1e-7)

    def test_random_lps_match_highs(self, rng):
        for _ in range(10):
            n, m_eq, m_ub = 20, 6, 8
            x0 = rng.random(n)
            A_eq = rng.normal(size=(m_eq, n))
            A_ub = rng.normal(size=(m_ub, n))
            lp = LinearProgram(rng.normal(size=n), A_ub, A_ub @ x0 + rng.random(m_ub), A_eq, A_eq @ x0,
                               upper=np.full(n, 2.0))
            ours = solve_lp(lp, "simplex")
            theirs = solve_lp(lp, "highs")
            assert ours.status == theirs.status == OPTIMAL
            assert ours.objective == pytest.approx(theirs.objective, abs=1e-6)
            assert lp.max_violation(ours.x) < 1e-7

    def test_iteration_limit(self):
        result = DenseRevisedSimplex(max_iter=1).solve(beale())
        assert result.status == "iteration_limit"


class TestBackends:
    def test_highs_statuses(self):
        solver = ScipyHighsSolver()
        assert solver.solve(LinearProgram(np.array([1.0]), np.array([[-1.0]]), np.array([-3.0]))).objective \
            == pytest.approx(3.0)
        assert solver.solve(LinearProgram(np.array([1.0]), np.array([[-1.0], [1.0]]),
                                          np.array([-3.0, 2.0]))).status == INFEASIBLE

    def test_unknown_backend(self):
        with pytest.raises(ConfigurationError):
            get_solver("cplex")

    def test_bad_dimensions(self):
        with pytest.raises(ConfigurationError):
            LinearProgram(np.array([1.0, 2.0]), np.array([[1.0]]), np.array([1.0]))
        with pytest.raises(ConfigurationError):
            LinearProgram(np.array([np.nan]))


class TestLinearProgram:
    def test_extra_row_and_objective(self):
        lp = LinearProgram(np.array([1.0, 1.0]), np.array([[-1.0, -1.0]]), np.array([-2.0]))
        tightened = lp.with_ub_row(np.array([1.0, 0.0]), 0.5, "cap").with_objective(np.array([0.0, 1.0]))
        assert tightened.n_rows == 2
        assert tightened.ub_names[-1] == "cap"
        result = solve_lp(tightened)
        assert result.x == pytest.approx([0.5, 1.5])
        assert lp.n_rows == 1

    def test_max_violation(self):
        lp = LinearProgram(np.array([1.0]), np.array([[1.0]]), np.array([1.0]), upper=np.array([3.0]))
        assert lp.max_violation(np.array([0.5])) == 0.0
        assert lp.max_violation(np.array([1.5])) == pytest.approx(0.5)
        assert lp.max_violation(np.array([-0.25])) == pytest.approx(0.25)


def test_write_lp_file(tmp_path):
    lp = LinearProgram(np.array([1.0, -2.0]), np.array([[1.0, 1.0]]), np.array([4.0]),
                       np.array([[1.0, -1.0]]), np.array([0.0]), upper=np.array([3.0, np.inf]),
                       col_names=["f_r0_A_B", "f0v_VA_VB"], ub_names=["cap_VA_VB"], eq_names=["cons_r0_A"],
                       name="tiny")
    path = tmp_path / "tiny.lp"
    write_lp_file(lp, str(path))
    text = path.read_text(encoding="utf-8")
    assert text.startswith("\\ tiny\nMinimize\n")
    assert " obj: 1 f_r0_A_B - 2 f0v_VA_VB" in text
    assert " cap_VA_VB: 1 f_r0_A_B + 1 f0v_VA_VB <= 4" in text
    assert " cons_r0_A: 1 f_r0_A_B - 1 f0v_VA_VB = 0" in text
    assert " 0 <= f_r0_A_B <= 3" in text
    assert " f0v_VA_VB >= 0" in text
    assert text.rstrip().endswith("End")
