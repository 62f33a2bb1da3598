import numpy as np
import pytest

from clearnet.lp import LinearProgram, LpError, solve, solve_or_raise
from clearnet.model import relative_liabilities
from conftest import shocked_er_network


def feasible_samples(rng, prog, count):
    """Random points of the feasible region: box draws shrunk toward 0.

    The origin is feasible for every program here, so scaling a box draw
    by the largest factor keeping G x <= h stays inside.
    """
    g, h, u = prog.constraint_matrix, prog.rhs, prog.upper_bounds
    out = []
    for _ in range(count):
        x = rng.uniform(0, u)
        if g.shape[0]:
            gx = g @ x
            over = gx > h
            if over.any():
                scale = np.min(h[over] / gx[over])
                x = x * max(scale, 0.0) * (1 - 1e-12)
        out.append(x)
    return out


class TestBasics:
    def test_single_variable_no_rows(self):
        prog = LinearProgram([1.0], np.zeros((0, 1)), [], [1.0])
        sol = solve(prog)
        assert sol.status == "optimal"
        assert sol.x[0] == 1.0
        assert sol.objective_value == 1.0

    def test_degenerate_optimum_face(self):
        prog = LinearProgram([1.0, 1.0], [[1.0, 1.0]], [1.0], [1.0, 1.0])
        sol = solve(prog)
        assert sol.status == "optimal"
        assert sol.objective_value == pytest.approx(1.0, abs=1e-12)

    def test_clearing_program_two_nodes(self, two_node):
        # fixed-point oracle gives p = (8, 5); the LP must land there
        a = relative_liabilities(two_node).a
        prog = LinearProgram(
            objective=np.ones(2),
            constraint_matrix=np.eye(2) - a.T,
            rhs=two_node.assets,
            upper_bounds=two_node.total_out,
        )
        sol = solve(prog)
        assert sol.status == "optimal"
        np.testing.assert_allclose(sol.x, [8, 5], atol=1e-10)

    def test_infeasible_rhs(self):
        prog = LinearProgram([1.0], [[1.0]], [-1.0], [2.0])
        assert solve(prog).status == "infeasible"
        with pytest.raises(LpError):
            solve_or_raise(prog)

    def test_zero_width_variable_stays_put(self):
        prog = LinearProgram([1.0, 1.0], [[1.0, 1.0]], [5.0], [0.0, 2.0])
        sol = solve(prog)
        assert sol.status == "optimal"
        assert sol.x[0] == 0.0
        assert sol.x[1] == pytest.approx(2.0)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            LinearProgram([1.0, 2.0], [[1.0]], [1.0], [1.0, 1.0])
        with pytest.raises(ValueError):
            LinearProgram([1.0], [[1.0]], [1.0], [-1.0])


class TestOptimalityCertificate:
    def test_beats_random_feasible_points(self):
        rng = np.random.default_rng(123)
        total_samples = 0
        for trial in range(20):
            m = int(rng.integers(1, 8))
            k = int(rng.integers(0, 6))
            prog = LinearProgram(
                objective=rng.normal(size=m),
                constraint_matrix=rng.normal(size=(k, m)),
                rhs=np.abs(rng.normal(size=k)) + 0.01,
                upper_bounds=rng.uniform(0.1, 3.0, size=m),
            )
            sol = solve(prog)
            assert sol.status == "optimal"
            for x in feasible_samples(rng, prog, 500):
                total_samples += 1
                assert sol.objective_value >= prog.objective @ x - 1e-7
        assert total_samples == 10_000

    def test_residuals_within_contract(self):
        for seed in range(60):
            net = shocked_er_network(seed + 4000)
            a = relative_liabilities(net).a
            prog = LinearProgram(
                objective=np.ones(net.n),
                constraint_matrix=np.eye(net.n) - a.T,
                rhs=net.assets,
                upper_bounds=net.total_out,
            )
            sol = solve(prog)
            assert sol.status == "optimal"
            assert sol.feasibility_residual <= 1e-8
            assert sol.complementarity_residual <= 1e-7


class TestDeterminism:
    def test_identical_inputs_identical_bits(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            m = int(rng.integers(1, 12))
            k = int(rng.integers(0, 8))
            prog = LinearProgram(
                objective=rng.normal(size=m),
                constraint_matrix=rng.normal(size=(k, m)),
                rhs=np.abs(rng.normal(size=k)),
                upper_bounds=rng.uniform(0.1, 2.0, size=m),
            )
            first = solve(prog)
            second = solve(prog)
            assert np.array_equal(first.x, second.x)
            assert first.objective_value == second.objective_value
            assert first.iterations == second.iterations
