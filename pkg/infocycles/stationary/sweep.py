"""
Comparative statics of the optimal cycle in the mean-reversion speed lam.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

import pandas as pd

from infocycles.model.errors import DomainError
from infocycles.model.problem import Problem
from infocycles.stationary.optimize import DEFAULT_GRID_POINTS, optimize_cycle

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ["lambda", "learning", "q0", "p0", "p1", "q1", "tau0", "tau1", "w_pi", "value"]


def _sweep_row(problem: Problem, lam: float, n_grid: int) -> dict:
    best = optimize_cycle(problem.with_lambda(lam), n_grid=n_grid)
    cycle = best.cycle
    row = {"lambda": lam, "learning": best.learning, "q0": cycle.q0, "p0": cycle.p0,
           "p1": cycle.p1, "q1": cycle.q1, "tau0": cycle.tau0, "tau1": cycle.tau1,
           "w_pi": best.candidate_w_pi, "value": best.value}
    if not best.learning:
        row.update(tau0=math.inf, tau1=math.inf)
    logger.debug("lambda=%.4g learning=%s tau=(%.6g, %.6g)", lam, best.learning, row["tau0"], row["tau1"])
    return row


def sweep_lambda(problem: Problem, lambdas: Sequence[float], n_grid: int = DEFAULT_GRID_POINTS,
                 max_workers: Optional[int] = None) -> pd.DataFrame:
    """
    Re-optimize the stationary cycle at every lam in `lambdas`.

    Rows where no cycle beats staying uninformed at pi report tau0 = tau1 =
    inf; w_pi is then the best candidate's value, for reference. With
    max_workers > 1 the rows are computed on a thread pool, in order.
    """
    lambdas = [float(lam) for lam in lambdas]
    if not lambdas:
        raise DomainError("sweep needs at least one lambda")
    if any(lam <= 0 for lam in lambdas):
        raise DomainError(f"lambdas must be positive, got {lambdas}")

    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            rows = list(pool.map(lambda lam: _sweep_row(problem, lam, n_grid), lambdas))
    else:
        rows = [_sweep_row(problem, lam, n_grid) for lam in lambdas]

    table = pd.DataFrame(rows, columns=SWEEP_COLUMNS)
    n_learning = int(table["learning"].sum())
    logger.info("swept %d values of lambda, %d with a profitable cycle", len(table), n_learning)
    return table
