"""
Direct search over belief cycles.

A cycle is parameterized by its targets (q0, q1) and the drift decay
factors y_i = |pi - p_i| / |pi - q_i| = e^{-lam tau_i}, so every point of
the box [lo, pi) x [0, 1) x (pi, hi] x [0, 1) is a valid cycle and
e^{-r tau_i} = y_i^{r/lam}. Values are computed in closed form for the
whole search grid at once, then refined one coordinate at a time.

Restricted to cycles whose four points are grid nodes, the search is exact
and agrees with the value iteration on the same grid.
"""

import logging
from typing import NamedTuple, Optional, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from infocycles.dynamics.longrun import BeliefCycle
from infocycles.model.problem import Problem
from infocycles.stationary.payoffs import (
    CyclePayoffs,
    cycle_payoffs,
    drift_segment_flow,
    flow_at,
    no_info_net_value,
)

logger = logging.getLogger(__name__)

DEFAULT_GRID_POINTS = 25
REFINE_SWEEPS = 3
REFINE_XTOL = 1e-10
_Y_MAX = 1.0 - 1e-9
GRID_POLICY_ITER = 200


class CycleOptimum(NamedTuple):
    cycle: BeliefCycle
    payoffs: CyclePayoffs
    value: float                # w(pi) = max{f(pi)/r, w_pi - kappa}
    learning: bool
    candidate: BeliefCycle      # best cycle found, even when not worth joining
    candidate_w_pi: float


def _cycle_values(problem: Problem, x0, y0, x1, y1, at):
    """
    Net target values and the chord value at belief `at` for broadcastable
    parameter arrays (targets x0 < pi < x1, decay factors y0, y1 in [0, 1)).
    """
    pi, kappa = problem.pi, problem.kappa
    a = problem.r / problem.lam
    p0 = pi - y0 * (pi - x0)
    p1 = pi + y1 * (x1 - pi)
    d0 = y0 ** a
    d1 = y1 ** a
    b0 = drift_segment_flow(x0, p0, d0, problem) - d0 * kappa
    b1 = drift_segment_flow(x1, p1, d1, problem) - d1 * kappa

    width = x1 - x0
    s0 = (p0 - x0) / width
    s1 = (p1 - x0) / width
    det = (1.0 - d0 * (1.0 - s0)) * (1.0 - d1 * s1) - d0 * s0 * d1 * (1.0 - s1)
    with np.errstate(divide="ignore", invalid="ignore"):
        w0 = (b0 * (1.0 - d1 * s1) + d0 * s0 * b1) / det
        w1 = ((1.0 - d0 * (1.0 - s0)) * b1 + d1 * (1.0 - s1) * b0) / det
        value = ((x1 - at) * w0 + (at - x0) * w1) / width
    return w0, w1, np.where(np.isfinite(value), value, -np.inf)


def _search_box(problem: Problem, at: float) -> Tuple[Tuple[float, float], Tuple[float, float]]:
    """Target ranges for q0 and q1 that keep q0 <= at <= q1."""
    lo, hi, pi = float(problem.grid[0]), float(problem.grid[-1]), problem.pi
    gap = 1e-9 * (hi - lo)
    return (lo, min(at, pi - gap)), (max(at, pi + gap), hi)


def search_cycles(problem: Problem, at: Optional[float] = None, n_grid: int = DEFAULT_GRID_POINTS,
                  refine: bool = True) -> Tuple[np.ndarray, float]:
    """
    Maximize the chord value at `at` (pi by default) over cycles whose
    targets bracket `at`.

    Returns:
        (params [q0, y0, q1, y1], best value)
    """
    at = problem.pi if at is None else float(at)
    (lo0, hi0), (lo1, hi1) = _search_box(problem, at)
    x0 = np.linspace(lo0, hi0, n_grid)
    x1 = np.linspace(lo1, hi1, n_grid)
    y = np.linspace(0.0, 1.0, n_grid + 1)[:-1]

    _, _, values = _cycle_values(problem, x0[:, None, None, None], y[None, :, None, None],
                                 x1[None, None, :, None], y[None, None, None, :], at)
    i, j, k, m = np.unravel_index(int(np.argmax(values)), values.shape)
    params = np.array([x0[i], y[j], x1[k], y[m]])
    best = float(values[i, j, k, m])
    logger.debug("grid search best %.8g at q0=%.6g y0=%.4g q1=%.6g y1=%.4g", best, *params)

    if refine and np.isfinite(best):
        bounds = ((lo0, hi0), (0.0, _Y_MAX), (lo1, hi1), (0.0, _Y_MAX))
        for _ in range(REFINE_SWEEPS):
            improved = False
            for axis, (lb, ub) in enumerate(bounds):
                def negative(z, axis=axis):
                    trial = params.copy()
                    trial[axis] = z
                    return -float(_cycle_values(problem, *trial, at)[2])

                res = minimize_scalar(negative, bounds=(lb, ub), method="bounded",
                                      options={"xatol": REFINE_XTOL})
                if res.success and -res.fun > best:
                    params[axis] = res.x
                    improved = improved or (-res.fun - best) > 1e-14 * max(1.0, abs(best))
                    best = -float(res.fun)
            if not improved:
                break
    return params, best


def _side_tables(problem: Problem, targets: np.ndarray, thresholds: np.ndarray,
                 net: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Segment payoff b = w_lower(q) - d (w_lower(p) + kappa) and discount
    d = e^{-r tau(q, p)} for every (target, threshold) pair of node indices
    on one side of pi. Pairs whose threshold is not strictly between the
    target and pi get b = -inf and d = 0.
    """
    grid, pi = problem.grid, problem.pi
    dist_q = np.abs(pi - grid[targets])[:, None]
    dist_p = np.abs(pi - grid[thresholds])[None, :]
    valid = dist_p < dist_q
    d = np.where(valid, dist_p / dist_q, 0.0) ** (problem.r / problem.lam)
    b = np.where(valid, net[targets][:, None] - d * (net[thresholds][None, :] + problem.kappa), -np.inf)
    return b, d


def _best_thresholds(B0, D0, S0, B1, D1, S1, max_iter: int):
    """
    Policy iteration on the two-target chain, one row per target pair.

    Column j of the side-i tables is the threshold choice: payoff B, discount
    D and probability S of landing on q1 after the split. Each sweep solves
    the 2x2 system for (w0, w1) and lets every side switch to a strictly
    better threshold given those values.

    Returns:
        (w0, w1, threshold column on side 0, threshold column on side 1)
    """
    rows = np.arange(B0.shape[0])
    with np.errstate(divide="ignore", invalid="ignore"):
        j = np.argmax(B0 / (1.0 - D0), axis=1)
        n = np.argmax(B1 / (1.0 - D1), axis=1)
    for _ in range(max_iter):
        b0, d0, s0 = B0[rows, j], D0[rows, j], S0[rows, j]
        b1, d1, s1 = B1[rows, n], D1[rows, n], S1[rows, n]
        det = (1.0 - d0 * (1.0 - s0)) * (1.0 - d1 * s1) - d0 * s0 * d1 * (1.0 - s1)
        w0 = (b0 * (1.0 - d1 * s1) + d0 * s0 * b1) / det
        w1 = ((1.0 - d0 * (1.0 - s0)) * b1 + d1 * (1.0 - s1) * b0) / det

        q_low = B0 + D0 * ((1.0 - S0) * w0[:, None] + S0 * w1[:, None])
        q_high = B1 + D1 * ((1.0 - S1) * w0[:, None] + S1 * w1[:, None])
        new_j = np.argmax(q_low, axis=1)
        new_n = np.argmax(q_high, axis=1)
        slack = 1e-13 * np.maximum(1.0, np.maximum(np.abs(w0), np.abs(w1)))
        switch0 = q_low[rows, new_j] > q_low[rows, j] + slack
        switch1 = q_high[rows, new_n] > q_high[rows, n] + slack
        if not (switch0.any() or switch1.any()):
            break
        j = np.where(switch0, new_j, j)
        n = np.where(switch1, new_n, n)
    else:
        logger.warning("threshold policy iteration hit %d sweeps", max_iter)
    return w0, w1, j, n


def search_grid_cycles(problem: Problem, at: Optional[float] = None,
                       max_iter: int = GRID_POLICY_ITER) -> Tuple[Optional[BeliefCycle], float]:
    """
    Best cycle whose targets and thresholds are all grid nodes.

    These are exactly the cycles the value iteration can follow, so the
    result matches the solved value at pi up to the bracket gap. Every pair
    of targets bracketing `at` (and pi) is enumerated; for a fixed pair the
    two targets form a finite discounted decision problem in the thresholds,
    which policy iteration solves exactly. Zero waiting times are excluded.

    Returns:
        (cycle, chord value at `at`), or (None, -inf) when no pair of targets admits thresholds
    """
    at = problem.pi if at is None else float(at)
    grid, k = problem.grid, problem.pi_index
    net = problem.no_info_value.values - problem.c.values
    low = np.arange(k)
    high = np.arange(k + 1, grid.size)
    x_low, x_high = grid[low], grid[high]
    b0, d0 = _side_tables(problem, low, low, net)
    b1, d1 = _side_tables(problem, high, high, net)

    rows1 = np.flatnonzero((x_high >= at) & np.isfinite(b1).any(axis=1))
    targets0 = np.flatnonzero((x_low <= at) & np.isfinite(b0).any(axis=1))
    if rows1.size == 0 or targets0.size == 0:
        return None, -np.inf

    shape = (rows1.size, low.size)
    B1, D1 = b1[rows1], d1[rows1]
    best, best_nodes = -np.inf, None
    for i in targets0:
        q0 = x_low[i]
        q1 = x_high[rows1]
        width = q1 - q0
        S0 = (x_low[None, :] - q0) / width[:, None]
        S1 = (x_high[None, :] - q0) / width[:, None]
        w0, w1, j, n = _best_thresholds(np.broadcast_to(b0[i], shape), np.broadcast_to(d0[i], shape), S0,
                                        B1, D1, S1, max_iter)
        value = ((q1 - at) * w0 + (at - q0) * w1) / width
        m = int(np.argmax(value))
        if value[m] > best:
            best = float(value[m])
            best_nodes = (x_low[i], x_low[j[m]], x_high[n[m]], x_high[rows1[m]])

    if best_nodes is None:
        return None, -np.inf
    logger.debug("grid cycle search best %.10g at q0=%.6g p0=%.6g p1=%.6g q1=%.6g", best, *best_nodes)
    return BeliefCycle.from_thresholds(*best_nodes, problem), best


def params_to_cycle(params: np.ndarray, problem: Problem) -> BeliefCycle:
    q0, y0, q1, y1 = (float(v) for v in params)
    pi = problem.pi
    return BeliefCycle.from_thresholds(q0, pi - y0 * (pi - q0), pi + y1 * (q1 - pi), q1, problem)


def optimize_cycle(problem: Problem, n_grid: int = DEFAULT_GRID_POINTS, refine: bool = True,
                   on_grid: bool = False) -> CycleOptimum:
    """
    Best stationary cycle to jump into from pi.

    Coarse grid search over (q0, y0, q1, y1) followed by coordinate-wise
    bounded refinement, or with `on_grid` the exact search over node cycles
    (search_grid_cycles). The value at pi is max{f(pi)/r, w_pi - kappa};
    when the first term wins, the reported cycle is degenerate at pi.
    """
    if on_grid:
        candidate, _ = search_grid_cycles(problem)
        if candidate is None:
            candidate = BeliefCycle.degenerate_at(problem.pi)
    else:
        params, _ = search_cycles(problem, None, n_grid, refine)
        candidate = params_to_cycle(params, problem)
    payoffs = cycle_payoffs(candidate, problem)
    stay = flow_at(problem.pi, problem) / problem.r

    if payoffs.w_pi - problem.kappa > stay:
        return CycleOptimum(candidate, payoffs, payoffs.w_pi - problem.kappa, True, candidate, payoffs.w_pi)

    logger.info("no cycle beats staying uninformed at pi (best w_pi=%.6g, f(pi)/r=%.6g)", payoffs.w_pi, stay)
    degenerate = BeliefCycle.degenerate_at(problem.pi)
    return CycleOptimum(degenerate, cycle_payoffs(degenerate, problem), stay, False, candidate, payoffs.w_pi)


def trap_margin(p: float, problem: Problem, n_grid: int = DEFAULT_GRID_POINTS, on_grid: bool = False) -> float:
    """Best p-weighted cycle value minus kappa, minus the no-information value w_lower(p)."""
    if on_grid:
        _, best = search_grid_cycles(problem, p)
    else:
        _, best = search_cycles(problem, p, n_grid)
    return best - problem.kappa - no_info_net_value(p, problem)


def trap_test(p: float, problem: Problem, n_grid: int = DEFAULT_GRID_POINTS, on_grid: bool = False) -> bool:
    """True when no cycle through p is worth joining at p: p lies in the trap region."""
    return trap_margin(p, problem, n_grid, on_grid) < 0.0
