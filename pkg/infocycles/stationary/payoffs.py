"""
Stationary payoffs of belief cycles.

Along a cycle the net value w = v - c collects the virtual flow f while
drifting from a target q_i to its threshold p_i, pays kappa, and restarts
from a target. The discounted flow of one drift segment follows from
integrating c along the path by parts:

    F(q, tau) = int_0^tau e^{-rt} u(q_t) dt - c(q) + e^{-r tau} c(q_tau)

so only u has to be integrated, and that integral is exact on the grid.
"""

import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from infocycles.dynamics.longrun import BeliefCycle
from infocycles.model.errors import DomainError
from infocycles.model.problem import Problem, drift, wait_time

logger = logging.getLogger(__name__)

AGREEMENT_TOL = 1e-9


@dataclass(frozen=True)
class CyclePayoffs:
    """Net values at the targets, at pi, and the mixing weight of the closed form."""
    w0: float
    w1: float
    w_pi: float
    alpha: float
    w_pi_alpha: float = math.nan
    residual: float = 0.0

    @property
    def routes_agree(self) -> bool:
        if math.isinf(self.w_pi) or math.isinf(self.w_pi_alpha):
            return self.w_pi == self.w_pi_alpha
        return abs(self.w_pi - self.w_pi_alpha) <= AGREEMENT_TOL * max(1.0, abs(self.w_pi))


def flow_at(p, problem: Problem):
    """Virtual flow f(p) = u(p) - r c(p) + lam (pi - p) c'(p) at arbitrary beliefs."""
    p = np.asarray(p, dtype=float)
    cost = problem.cost
    with np.errstate(invalid="ignore"):
        drift_term = np.where(p == problem.pi, 0.0,
                              problem.lam * (problem.pi - p) * cost.derivative(p, grid=problem.grid))
    out = problem.u(p) - problem.r * cost.value(p) + drift_term
    return float(out) if np.ndim(out) == 0 else out


def _integral_u(p, problem: Problem):
    return problem.paths.integral(problem.u.values, p, nodes=problem.no_info_value.values)


def no_info_net_value(p, problem: Problem):
    """w_lower(p) = v_lower(p) - c(p) at arbitrary beliefs."""
    out = _integral_u(p, problem) - problem.cost.value(p)
    return float(out) if np.ndim(out) == 0 else out


def drift_segment_flow(q, p, discount, problem: Problem):
    """F for the drift from q to p, given discount = e^{-r tau(q, p)} (vectorized)."""
    gross = _integral_u(q, problem) - discount * _integral_u(p, problem)
    return gross - problem.cost.value(q) + discount * problem.cost.value(p)


def segment_flow(q: float, tau: float, problem: Problem) -> float:
    """F(q, tau) = int_0^tau e^{-rt} f(q_t) dt."""
    if tau < 0:
        raise DomainError(f"segment duration must be non-negative, got {tau}")
    return float(drift_segment_flow(q, drift(q, tau, problem), math.exp(-problem.r * tau), problem))


def _mixing_factor(tau: float, problem: Problem) -> float:
    """(1 - e^{-r tau}) / (1 - e^{-(r + lam) tau}), continuous at 0 and infinity."""
    if tau == 0:
        return problem.r / (problem.r + problem.lam)
    return -math.expm1(-problem.r * tau) / -math.expm1(-(problem.r + problem.lam) * tau)


def _one_shot_value(F: float, tau: float, q: float, problem: Problem) -> float:
    """(F - e^{-r tau} kappa) / (1 - e^{-r tau}) with its tau -> 0 limit."""
    if tau == 0:
        return -math.inf if problem.kappa > 0 else flow_at(q, problem) / problem.r
    d = math.exp(-problem.r * tau)
    return (F - d * problem.kappa) / -math.expm1(-problem.r * tau)


def cycle_payoffs(cycle: BeliefCycle, problem: Problem) -> CyclePayoffs:
    """
    Net values (w0, w1) at the targets from the linear system

        w_i = F_i + e^{-r tau_i} (((q1 - p_i) w0 + (p_i - q0) w1) / (q1 - q0) - kappa)

    and w_pi, the value of jumping into the cycle from pi, cross-checked
    against its closed form as an alpha-weighted average of the one-shot
    values (F_i - e^{-r tau_i} kappa) / (1 - e^{-r tau_i}).
    """
    pi, kappa = problem.pi, problem.kappa
    if cycle.q0 == cycle.q1:
        value = flow_at(pi, problem) / problem.r
        return CyclePayoffs(value, value, value, 0.5, value, 0.0)

    q0, q1 = cycle.q0, cycle.q1
    width = q1 - q0
    taus = (cycle.tau0, cycle.tau1)
    targets = (q0, q1)
    thresholds = (cycle.p0, cycle.p1)
    discounts = tuple(math.exp(-problem.r * t) for t in taus)
    flows = tuple(segment_flow(q, t, problem) if t > 0 else 0.0 for q, t in zip(targets, taus))

    # alpha route
    a1 = (pi - q0) / width * _mixing_factor(taus[1], problem)
    a0 = (q1 - pi) / width * _mixing_factor(taus[0], problem)
    alpha = a1 / (a0 + a1)
    one_shot = tuple(_one_shot_value(F, t, q, problem) for F, t, q in zip(flows, taus, targets))
    w_pi_alpha = alpha * one_shot[1] + (1.0 - alpha) * one_shot[0]

    if 0.0 in taus:
        if kappa > 0:
            logger.debug("cycle with a zero waiting time pays kappa continuously: value -inf")
            return CyclePayoffs(-math.inf, -math.inf, -math.inf, alpha, -math.inf, 0.0)
        w = _solve_with_instant_sides(taus, targets, thresholds, discounts, flows, problem)
        residual = 0.0
    else:
        A = np.empty((2, 2))
        b = np.empty(2)
        for i in range(2):
            s = (thresholds[i] - q0) / width
            A[i] = (-discounts[i] * (1.0 - s), -discounts[i] * s)
            A[i, i] += 1.0
            b[i] = flows[i] - discounts[i] * kappa
        w = np.linalg.solve(A, b)
        residual = float(np.max(np.abs(A @ w - b)))

    w0, w1 = float(w[0]), float(w[1])
    w_pi = ((q1 - pi) * w0 + (pi - q0) * w1) / width
    payoffs = CyclePayoffs(w0, w1, w_pi, alpha, w_pi_alpha, residual)
    if not payoffs.routes_agree:
        logger.warning("linear-system and closed-form w_pi differ: %.12g vs %.12g", w_pi, w_pi_alpha)
    return payoffs


def _solve_with_instant_sides(taus, targets, thresholds, discounts, flows, problem) -> np.ndarray:
    """kappa = 0 continuous extension: a side with tau = 0 is worth f(q_i)/r."""
    q0, q1 = targets
    width = q1 - q0
    w = np.full(2, np.nan)
    for i in range(2):
        if taus[i] == 0:
            w[i] = flow_at(targets[i], problem) / problem.r
    for i in range(2):
        if np.isnan(w[i]):
            j = 1 - i
            s = (thresholds[i] - q0) / width
            own = s if i == 1 else 1.0 - s
            w[i] = (flows[i] + discounts[i] * (1.0 - own) * w[j]) / (1.0 - discounts[i] * own)
    return w


def symmetric_cycle_value(q: float, p: float, problem: Problem) -> float:
    """
    Gross value at target q of the symmetric cycle with threshold p:

        (int_0^tau e^{-rt} u(q_t) dt - e^{-r tau} (c(q) - c(p) + kappa)) / (1 - e^{-r tau})

    with the information cost c(q) - c(p) and kappa paid at the end of each
    period. Requires pi <= p <= q. A zero waiting time is -inf when kappa > 0;
    with kappa = 0 the continuous extension (f(q) + r c(q)) / r is returned.
    """
    pi = problem.pi
    if not pi <= p <= q <= 1.0:
        raise DomainError(f"symmetric cycle needs pi <= p <= q <= 1, got p={p}, q={q}")
    tau = wait_time(q, p, problem)
    cost = problem.cost
    if tau == 0:
        if problem.kappa > 0:
            return -math.inf
        return (flow_at(q, problem) + problem.r * cost.value(q)) / problem.r
    d = math.exp(-problem.r * tau)
    gross = _integral_u(q, problem) - d * _integral_u(p, problem)
    return (gross - d * (cost.value(q) - cost.value(p) + problem.kappa)) / -math.expm1(-problem.r * tau)


def simulate_cycle_payoff(cycle: BeliefCycle, problem: Problem, n_paths: int = 100000,
                          seed: int = 0, tail: float = 1e-8) -> Tuple[float, float]:
    """
    Monte-Carlo value of jumping into the cycle from pi.

    Each path accumulates e^{-rt} (F_i - e^{-r tau_i} kappa) per drift
    segment and jumps to q1 with the Bayes-plausible weight at the threshold,
    until e^{-rt} < tail on every path.

    Returns:
        (mean, standard error)
    """
    if cycle.is_degenerate:
        raise DomainError("Monte-Carlo payoff needs a non-degenerate cycle")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    width = cycle.q1 - cycle.q0
    taus = np.array([cycle.tau0, cycle.tau1])
    discounts = np.exp(-problem.r * taus)
    flows = np.array([segment_flow(cycle.q0, cycle.tau0, problem), segment_flow(cycle.q1, cycle.tau1, problem)])
    payoff = flows - discounts * problem.kappa
    to_high = np.array([(cycle.p0 - cycle.q0) / width, (cycle.p1 - cycle.q0) / width])

    side = (rng.random(n_paths) < (problem.pi - cycle.q0) / width).astype(int)
    t = np.zeros(n_paths)
    acc = np.zeros(n_paths)
    while math.exp(-problem.r * t.min()) >= tail:
        acc += np.exp(-problem.r * t) * payoff[side]
        t += taus[side]
        side = (rng.random(n_paths) < to_high[side]).astype(int)
    return float(acc.mean()), float(acc.std(ddof=1) / math.sqrt(n_paths))
