"""
Bellman operators on grid value functions.

G adds the value of one costless-to-design experiment (concavification of
the net value), S solves the deterministic stopping problem along the drift
with stopping payoff g - kappa, and Phi = S o G.
"""

import numpy as np

from infocycles.envelope import concave_envelope
from infocycles.model.grid import GridFunction
from infocycles.model.problem import Problem


def info_value_G(v: GridFunction, problem: Problem) -> GridFunction:
    """G v = Cav[v - c] + c."""
    env = concave_envelope(v - problem.c)
    return (env.cav + problem.c).maximum(v)


def stopping_S(g: GridFunction, problem: Problem) -> GridFunction:
    """
    Optimal stopping along the drift with stopping payoff g - kappa.

    For a node p the candidates are every node q between p and pi (stop on
    arrival at q) and never stopping. With the flow accumulated from p to q
    equal to v_lower(p) - e^{-r tau} v_lower(q), the best candidate is

        S g(p) = v_lower(p) + max(0, max_q (|pi-q|/|pi-p|)^{r/lam} (g(q) - kappa - v_lower(q)))

    which is the backward sweep from pi outward written in closed form. The
    running maximum is kept in log space so large r/lam cannot underflow.
    """
    lower = problem.no_info_value
    h = g.values - problem.kappa - lower.values
    a = problem.r / problem.lam
    k = problem.pi_index
    grid = problem.grid

    excess = np.zeros_like(h)
    excess[k] = max(h[k], 0.0)
    for side in (np.arange(k + 1, grid.size), np.arange(k - 1, -1, -1)):
        if side.size == 0:
            continue
        log_dist = a * np.log(np.abs(grid[side] - problem.pi))
        gain = h[side]
        with np.errstate(divide="ignore"):
            score = np.where(gain > 0, log_dist + np.log(np.where(gain > 0, gain, 1.0)), -np.inf)
        best = np.maximum.accumulate(score)
        excess[side] = np.where(np.isfinite(best), np.exp(best - log_dist), 0.0)

    return lower + excess


def bellman_step(v: GridFunction, problem: Problem) -> GridFunction:
    """Phi v = S(G v)."""
    return stopping_S(info_value_G(v, problem), problem)


def check_variational_inequality(v: GridFunction, problem: Problem) -> GridFunction:
    """
    Residual of max{u - r v + lam (pi - p) v', G v - kappa - v} at each node.

    Zero (up to discretization) at the fixed point: the first term vanishes
    in the waiting region and the second in the information region.
    """
    grid = problem.grid
    slope = np.gradient(v.values, grid)
    hjb = problem.u.values - problem.r * v.values + problem.lam * (problem.pi - grid) * slope
    jump = info_value_G(v, problem).values - problem.kappa - v.values
    return v.with_values(np.maximum(hjb, jump))
