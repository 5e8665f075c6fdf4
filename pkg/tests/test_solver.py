"""Tests for the Bellman operators and the bracketed value iteration."""

import numpy as np
import pytest

from infocycles.model import GridFunction, value_bounds
from infocycles.solver import (
    bellman_step,
    check_variational_inequality,
    default_tolerance,
    info_value_G,
    solve,
    stopping_S,
)

TOL = 1e-12
# contact snapping in the envelope perturbs Phi by up to 1e-9 relative
MONO_TOL = 1e-8


def brute_force_S(g: np.ndarray, problem) -> np.ndarray:
    """Best of never stopping and stopping at each node between p and pi, node by node."""
    grid, pi, a = problem.grid, problem.pi, problem.r / problem.lam
    lower = problem.no_info_value.values
    out = np.empty_like(g)
    for i, p in enumerate(grid):
        best = lower[i]
        if p == pi:
            best = max(best, g[i] - problem.kappa)
        for j, q in enumerate(grid):
            on_path = (p < pi and p <= q < pi) or (p > pi and pi < q <= p)
            if on_path:
                discount = (abs(pi - q) / abs(pi - p)) ** a
                best = max(best, lower[i] + discount * (g[j] - problem.kappa - lower[j]))
        out[i] = best
    return out


def brute_force_G(v: np.ndarray, problem) -> np.ndarray:
    """Best split of each node onto a pair of nodes around it."""
    grid, c = problem.grid, problem.c.values
    w = v - c
    out = v.copy()
    for k in range(grid.size):
        for i in range(k + 1):
            for j in range(k, grid.size):
                if i == j:
                    continue
                t = (grid[k] - grid[i]) / (grid[j] - grid[i])
                out[k] = max(out[k], (1 - t) * w[i] + t * w[j] + c[k])
    return out


# ═══════════════════════════════════════════════════════════════════
# OPERATORS
# ═══════════════════════════════════════════════════════════════════


class TestInfoValueG:
    """G v = Cav[v - c] + c, never below v."""

    def test_dominates_v(self, small_problem):
        lower, _ = value_bounds(small_problem)
        assert np.all(info_value_G(lower, small_problem).values >= lower.values)

    def test_matches_best_two_point_split(self, small_problem):
        lower, _ = value_bounds(small_problem)
        expected = brute_force_G(lower.values, small_problem)
        np.testing.assert_allclose(info_value_G(lower, small_problem).values, expected, atol=1e-8)

    def test_fixed_when_net_value_is_concave(self, small_problem):
        # v - c = 0 is concave, so no split helps
        v = small_problem.c
        np.testing.assert_allclose(info_value_G(v, small_problem).values, v.values, atol=TOL)


class TestStoppingS:
    """Closed-form S against an explicit node-by-node sweep."""

    def test_matches_brute_force(self, small_problem):
        rng = np.random.default_rng(3)
        lower = small_problem.no_info_value.values
        for _ in range(20):
            g = lower + rng.normal(scale=0.05, size=lower.size)
            got = stopping_S(small_problem.u.with_values(g), small_problem).values
            np.testing.assert_allclose(got, brute_force_S(g, small_problem), atol=1e-12)

    def test_never_below_no_info_value(self, small_problem):
        low = small_problem.no_info_value
        s = stopping_S(low - 1.0, small_problem)
        np.testing.assert_allclose(s.values, low.values, atol=TOL)


class TestBellmanStep:

    def test_one_update_exhaustive(self, small_problem):
        """Phi v_lower equals the best single experiment over all node thresholds and splits."""
        lower, _ = value_bounds(small_problem)
        g = brute_force_G(lower.values, small_problem)
        expected = brute_force_S(g, small_problem)
        np.testing.assert_allclose(bellman_step(lower, small_problem).values, expected, atol=1e-8)

    def test_monotone(self, small_problem):
        lower, upper = value_bounds(small_problem)
        mid = lower.with_values(0.5 * (lower.values + upper.values))
        a = bellman_step(lower, small_problem).values
        b = bellman_step(mid, small_problem).values
        c = bellman_step(upper, small_problem).values
        assert np.all(a <= b + 1e-8)
        assert np.all(b <= c + 1e-8)


# ═══════════════════════════════════════════════════════════════════
# BRACKETED ITERATION
# ═══════════════════════════════════════════════════════════════════


class TestSolve:

    def test_small_problem_converges(self, small_problem):
        result = solve(small_problem, tol=1e-8)
        bracket = result.bracket
        assert bracket.converged
        assert bracket.gap < 1e-8
        assert np.all(bracket.lower.values <= bracket.upper.values + MONO_TOL)

    def test_gap_history_non_increasing(self, small_problem):
        history = np.array(solve(small_problem, tol=1e-8).bracket.history)
        assert np.all(np.diff(history) <= MONO_TOL)

    def test_iterates_monotone_without_clamping(self, small_problem):
        """Phi alone moves v_lower up and v_upper down; the sequences never cross."""
        lower, upper = value_bounds(small_problem)
        for _ in range(60):
            next_lower = bellman_step(lower, small_problem)
            next_upper = bellman_step(upper, small_problem)
            assert np.all(next_lower.values >= lower.values - MONO_TOL)
            assert np.all(next_upper.values <= upper.values + MONO_TOL)
            assert np.all(next_lower.values <= next_upper.values + MONO_TOL)
            lower, upper = next_lower, next_upper

    def test_benchmark_iterates_monotone(self, benchmark_problem):
        lower, upper = value_bounds(benchmark_problem)
        for _ in range(25):
            next_lower = bellman_step(lower, benchmark_problem)
            next_upper = bellman_step(upper, benchmark_problem)
            assert np.all(next_lower.values >= lower.values - MONO_TOL)
            assert np.all(next_upper.values <= upper.values + MONO_TOL)
            lower, upper = next_lower, next_upper
        assert np.all(lower.values <= upper.values + MONO_TOL)

    def test_bracket_inside_ex_ante_bounds(self, small_problem):
        lower, upper = value_bounds(small_problem)
        bracket = solve(small_problem, tol=1e-8).bracket
        assert np.all(bracket.lower.values >= lower.values - MONO_TOL)
        assert np.all(bracket.upper.values <= upper.values + MONO_TOL)

    def test_fixed_point(self, small_problem):
        result = solve(small_problem, tol=1e-8)
        again = bellman_step(result.v, small_problem)
        np.testing.assert_allclose(again.values, result.v.values, atol=1e-7)

    def test_iteration_cap(self, benchmark_problem):
        result = solve(benchmark_problem, tol=1e-14, max_iter=3)
        assert not result.bracket.converged
        assert result.bracket.n_iter == 3

    def test_rejects_non_positive_tol(self, small_problem):
        with pytest.raises(ValueError):
            solve(small_problem, tol=0.0)

    def test_default_tolerance(self, small_problem):
        lower, upper = value_bounds(small_problem)
        assert default_tolerance(lower, upper) == pytest.approx(1e-6 * (upper.sup() - lower.inf()))

    def test_frame_columns(self, small_problem):
        frame = solve(small_problem).to_frame(small_problem)
        assert list(frame.columns) == ["belief", "v_lower", "v_upper", "v", "w", "cav_w", "gamma_w"]
        assert (frame["gamma_w"] >= -TOL).all()


class TestBenchmarkSolution:
    """Entropy benchmark, 401 nodes."""

    def test_converged(self, benchmark_solution):
        assert benchmark_solution.bracket.converged

    def test_residual_value_bounded_by_kappa(self, benchmark_problem, benchmark_solution):
        frame = benchmark_solution.to_frame(benchmark_problem)
        gap = benchmark_solution.bracket.gap
        assert (frame["gamma_w"] >= -TOL).all()
        assert (frame["gamma_w"] <= benchmark_problem.kappa + 10 * gap + 1e-9).all()

    def test_symmetric(self, benchmark_solution):
        w = benchmark_solution.w.values
        np.testing.assert_allclose(w, w[::-1], atol=1e-7)

    def test_variational_inequality_on_info_region(self, benchmark_problem, benchmark_solution, benchmark_policy):
        residual = check_variational_inequality(benchmark_solution.v, benchmark_problem)
        assert np.all(residual.values[benchmark_policy.info_mask] >= -benchmark_policy.tolerance - 1e-12)
