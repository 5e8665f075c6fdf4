"""
Bracketed fixed-point iteration for the value function.

Phi is monotone and maps [v_lower, v_upper] into itself, so iterating from
both bounds produces a lower sequence (the n-update constrained values) and
an upper sequence (the relaxed values) that squeeze the true solution.
"""

import logging
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np
import pandas as pd

from infocycles.envelope import concave_envelope
from infocycles.model.grid import GridFunction
from infocycles.model.problem import Problem, value_bounds
from infocycles.solver.operators import bellman_step

logger = logging.getLogger(__name__)

DEFAULT_MAX_ITER = 10000
DEFAULT_RTOL = 1e-6


@dataclass(frozen=True, eq=False)
class ValueBracket:
    lower: GridFunction
    upper: GridFunction
    n_iter: int
    gap: float
    tol: float
    converged: bool
    history: Tuple[float, ...] = ()

    @property
    def error_bound(self) -> float:
        return self.gap / 2.0

    @property
    def midpoint(self) -> GridFunction:
        return self.lower.with_values((self.lower.values + self.upper.values) / 2.0)


class SolveResult(NamedTuple):
    bracket: ValueBracket
    v: GridFunction
    w: GridFunction

    def to_frame(self, problem: Problem) -> pd.DataFrame:
        """belief, v_lower, v_upper, v, w, cav_w, gamma_w."""
        cav_w = concave_envelope(self.w).cav
        return pd.DataFrame({
            "belief": problem.grid,
            "v_lower": self.bracket.lower.values,
            "v_upper": self.bracket.upper.values,
            "v": self.v.values,
            "w": self.w.values,
            "cav_w": cav_w.values,
            "gamma_w": cav_w.values - self.w.values,
        })


def default_tolerance(lower: GridFunction, upper: GridFunction) -> float:
    scale = max(1.0, float(np.max(np.abs(upper.values))), float(np.max(np.abs(lower.values))))
    return max(DEFAULT_RTOL * (upper.sup() - lower.inf()), 1e-12 * scale)


def solve(problem: Problem, tol: Optional[float] = None, max_iter: int = DEFAULT_MAX_ITER,
          log_every: int = 100) -> SolveResult:
    """
    Iterate Phi from both value bounds until the bracket gap falls below tol.

    Args:
        problem: Problem primitives
        tol: Sup-norm gap target; defaults to 1e-6 * (sup v_upper - inf v_lower)
        max_iter: Iteration cap; hitting it returns an unconverged bracket
        log_every: DEBUG log period in iterations

    Returns:
        SolveResult (bracket, v, w) with v the bracket midpoint and w = v - c
    """
    v_lower, v_upper = value_bounds(problem)
    if tol is None:
        tol = default_tolerance(v_lower, v_upper)
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")

    lower, upper = v_lower, v_upper
    history = []
    gap = float(np.max(upper.values - lower.values))
    n_iter = 0

    # at least one application so the reported iterate is a Phi image
    while n_iter == 0 or (gap >= tol and n_iter < max_iter):
        lower = bellman_step(lower, problem)
        upper = bellman_step(upper, problem)
        n_iter += 1
        gap = float(np.max(upper.values - lower.values))
        history.append(gap)
        if n_iter % log_every == 0:
            logger.debug("iteration %d: gap=%.3e (tol=%.3e)", n_iter, gap, tol)

    converged = gap < tol
    if converged:
        logger.info("converged in %d iterations, gap=%.3e", n_iter, gap)
    else:
        logger.warning("no convergence after %d iterations, gap=%.3e > tol=%.3e", n_iter, gap, tol)

    bracket = ValueBracket(lower, upper, n_iter, gap, tol, converged, tuple(history))
    v = bracket.midpoint
    return SolveResult(bracket, v, v - problem.c)
