"""Shared problems and solved benchmarks for the test suite."""

import numpy as np
import pytest

from infocycles.model import CostSpec, GridFunction, Problem
from infocycles.policy import extract_policy
from infocycles.solver import solve

TWO_ACTIONS = [(1.0, -1.0), (-1.0, 1.0)]

# Hand-built net value: Cav w = 0 on [0.053, 0.947], Gamma w = 0.01 on
# 0.183..0.817 and 0.005 at 0.1 and 0.9.
SYNTHETIC_GRID = np.array([0.0, 0.053, 0.1, 0.183, 0.3, 0.5, 0.7, 0.817, 0.9, 0.947, 1.0])
SYNTHETIC_W = np.array([-1.0, 0.0, -0.005, -0.01, -0.01, -0.01, -0.01, -0.01, -0.005, 0.0, -1.0])
SYNTHETIC_KAPPA = 0.01


@pytest.fixture(scope="session")
def benchmark_problem():
    """u = max(1 - 2p, 2p - 1), entropy cost 0.1, lam 0.5, pi 0.5, r 1, kappa 0.01."""
    return Problem.from_actions(TWO_ACTIONS, CostSpec(kind="entropy", scale=0.1),
                                lam=0.5, pi=0.5, r=1.0, kappa=0.01, grid_size=401)


@pytest.fixture(scope="session")
def benchmark_solution(benchmark_problem):
    return solve(benchmark_problem, tol=1e-7)


@pytest.fixture(scope="session")
def benchmark_policy(benchmark_problem, benchmark_solution):
    return extract_policy(benchmark_solution.w, benchmark_problem, benchmark_solution.bracket.gap)


@pytest.fixture(scope="session")
def small_problem():
    """21-node neg-variance problem for exhaustive checks."""
    return Problem.from_actions(TWO_ACTIONS, CostSpec(kind="neg-variance", scale=0.5),
                                lam=0.5, pi=0.5, r=1.0, kappa=0.01, grid_size=21)


@pytest.fixture(scope="session")
def synthetic_problem():
    return Problem.from_actions(TWO_ACTIONS, CostSpec(kind="neg-variance", scale=0.5),
                                lam=0.5, pi=0.5, r=1.0, kappa=SYNTHETIC_KAPPA, grid=SYNTHETIC_GRID)


@pytest.fixture(scope="session")
def synthetic_policy(synthetic_problem):
    return extract_policy(GridFunction(SYNTHETIC_GRID, SYNTHETIC_W), synthetic_problem)


@pytest.fixture(scope="session")
def trap_policy(synthetic_problem):
    """Same geometry, but Gamma w(pi) < kappa so pi is outside the information region."""
    w = SYNTHETIC_W.copy()
    w[5] = -0.005
    return extract_policy(GridFunction(SYNTHETIC_GRID, w), synthetic_problem)


@pytest.fixture(scope="session")
def valley_problem():
    """Zero cost, u = (1, 0, 1) on three nodes: Cav[f] = 1 on the whole unit interval."""
    return Problem.from_table([0.0, 0.5, 1.0], [1.0, 0.0, 1.0], CostSpec(kind="zero"),
                              lam=0.5, pi=0.5, r=1.0, grid_size=3)
