"""
kappa -> 0 convergence of optimal cycles toward the wait-or-confirm long run.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence, Tuple

import pandas as pd

from infocycles.dynamics.longrun import CYCLE, detect_cycle
from infocycles.limit.woc import longrun_interval
from infocycles.model.errors import DomainError
from infocycles.model.problem import Problem
from infocycles.policy import extract_policy
from infocycles.solver import solve

logger = logging.getLogger(__name__)

CONVERGENCE_COLUMNS = ["kappa", "outcome", "q0", "p0", "p1", "q1", "tau0", "tau1",
                       "q0_gap", "q1_gap", "p0_gap", "p1_gap", "n_iter", "gap"]


def _study_row(problem: Problem, kappa: float, limit: Optional[Tuple[float, float]],
               tol: Optional[float]) -> dict:
    p_k = problem.with_kappa(kappa)
    result = solve(p_k, tol=tol)
    pm = extract_policy(result.w, p_k, result.bracket.gap)
    report = detect_cycle(pm, p_k)

    row = dict.fromkeys(CONVERGENCE_COLUMNS, math.nan)
    row.update(kappa=kappa, outcome=report.outcome, n_iter=result.bracket.n_iter, gap=result.bracket.gap)
    if report.outcome == CYCLE:
        c = report.cycle
        row.update(q0=c.q0, p0=c.p0, p1=c.p1, q1=c.q1, tau0=c.tau0, tau1=c.tau1)
        if limit is not None:
            q0f, q1f = limit
            row.update(q0_gap=abs(c.q0 - q0f), q1_gap=abs(c.q1 - q1f),
                       p0_gap=abs(c.p0 - q0f), p1_gap=abs(c.p1 - q1f))
    logger.info("kappa=%.4g: %s after %d iterations", kappa, report.outcome, result.bracket.n_iter)
    return row


def convergence_study(problem: Problem, kappas: Sequence[float], max_workers: Optional[int] = None,
                      tol: Optional[float] = None) -> pd.DataFrame:
    """
    Solve at each kappa and measure the cycle against the kappa = 0 long-run interval.

    Gaps are |q_i - q_i^f| for the targets and |p_i - q_i^f| for the
    thresholds; they are NaN when either the cycle or the limit interval
    is missing.

    Raises:
        DomainError: kappas empty, non-positive or not strictly decreasing
    """
    kappas = [float(k) for k in kappas]
    if not kappas or any(k <= 0 for k in kappas):
        raise DomainError(f"kappas must be a non-empty list of positive values, got {kappas}")
    if any(b >= a for a, b in zip(kappas, kappas[1:])):
        raise DomainError(f"kappas must be strictly decreasing, got {kappas}")

    limit = longrun_interval(problem)
    if limit is None:
        logger.info("Cav[f] touches f at pi: no long-run interval to converge to")

    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            rows = list(pool.map(lambda k: _study_row(problem, k, limit, tol), kappas))
    else:
        rows = [_study_row(problem, k, limit, tol) for k in kappas]
    return pd.DataFrame(rows, columns=CONVERGENCE_COLUMNS)
