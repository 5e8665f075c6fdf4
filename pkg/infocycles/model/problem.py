"""
Problem primitives and the elementary operations on them.

The hidden state switches between 0 and 1 with total rate lam and invariant
probability pi. Without information, beliefs drift deterministically toward
pi; information is bought through experiments priced by a UPS cost plus a
fixed cost kappa.
"""

import logging
import math
from dataclasses import dataclass, replace
from functools import cached_property, lru_cache
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.special import roots_jacobi

from infocycles.model.costs import CostSpec
from infocycles.model.errors import BayesPlausibilityError, DomainError, ModelError
from infocycles.model.grid import DEFAULT_GRID_SIZE, GridFunction, check_convexity, make_grid
from infocycles.model.paths import PathIntegrator

logger = logging.getLogger(__name__)

BAYES_TOL = 1e-9
DEFAULT_QUAD_NODES = 64


@dataclass(frozen=True)
class Experiment:
    """Finite posterior distribution: beliefs `posteriors` with probabilities `weights`."""
    posteriors: Tuple[float, ...]
    weights: Tuple[float, ...]

    def __post_init__(self):
        if len(self.posteriors) != len(self.weights) or not self.posteriors:
            raise DomainError("experiment needs matching, non-empty posteriors and weights")
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < -BAYES_TOL) or abs(w.sum() - 1.0) > BAYES_TOL:
            raise DomainError(f"weights must be non-negative and sum to 1, got {self.weights}")

    @classmethod
    def point_mass(cls, p: float) -> "Experiment":
        return cls((float(p),), (1.0,))

    @classmethod
    def binary(cls, q0: float, q1: float, weight1: float) -> "Experiment":
        if q0 == q1 or weight1 <= 0.0:
            return cls.point_mass(q0)
        if weight1 >= 1.0:
            return cls.point_mass(q1)
        return cls((float(q0), float(q1)), (1.0 - weight1, float(weight1)))

    @property
    def mean(self) -> float:
        return float(np.dot(self.posteriors, self.weights))

    @property
    def is_degenerate(self) -> bool:
        return len(self.posteriors) == 1

    def check_bayes_plausible(self, p: float, tol: float = BAYES_TOL) -> None:
        violation = abs(self.mean - p)
        if violation > tol:
            raise BayesPlausibilityError(
                f"posterior mean {self.mean:.12g} differs from prior {p:.12g}", violation
            )


@dataclass(frozen=True, eq=False)
class Problem:
    """
    Full primitive bundle: flow utility u sampled on the belief grid, cost
    potential, transition rate lam, invariant probability pi, discount rate r
    and fixed cost kappa.
    """
    u: GridFunction
    cost: CostSpec
    lam: float
    pi: float
    r: float
    kappa: float = 0.0
    quad_nodes: int = DEFAULT_QUAD_NODES

    def __post_init__(self):
        if not self.lam > 0:
            raise ModelError(f"lambda must be positive, got {self.lam}")
        if not self.r > 0:
            raise ModelError(f"r must be positive, got {self.r}")
        if not 0.0 < self.pi < 1.0:
            raise ModelError(f"pi must lie in (0, 1), got {self.pi}")
        if not self.kappa >= 0:
            raise ModelError(f"kappa must be non-negative, got {self.kappa}")
        if self.u.node_index(self.pi, atol=0.0) < 0:
            raise ModelError(f"pi={self.pi} is not a node of the belief grid")
        if self.u.grid[0] < 0.0 or self.u.grid[-1] > 1.0:
            raise ModelError("belief grid must lie inside [0, 1]")
        if not np.all(np.isfinite(self.u.values)):
            raise ModelError("flow utility must be finite on the grid")
        interior = slice(1, -1) if self.cost.diverges else slice(None)
        ok, message = check_convexity(self.c.values[interior], self.grid[interior])
        if not ok:
            raise ModelError(f"cost potential is not convex: {message}")

    # ── builders ─────────────────────────────────────────────────────────────

    @classmethod
    def from_function(cls, fn: Callable[[np.ndarray], np.ndarray], cost: CostSpec,
                      lam: float, pi: float, r: float, kappa: float = 0.0,
                      grid: Optional[np.ndarray] = None, grid_size: int = DEFAULT_GRID_SIZE,
                      clip: Optional[float] = None, **kwargs) -> "Problem":
        """Sample a vectorized u(p) on a fresh grid (or on `grid` when given)."""
        if grid is None:
            grid = make_grid(grid_size, pi, cost.default_clip() if clip is None else clip)
        grid = np.asarray(grid, dtype=float)
        return cls(GridFunction(grid, np.asarray(fn(grid), dtype=float)), cost, lam, pi, r, kappa, **kwargs)

    @classmethod
    def from_actions(cls, actions: Sequence[Tuple[float, float]], cost: CostSpec,
                     lam: float, pi: float, r: float, kappa: float = 0.0, **kwargs) -> "Problem":
        """
        Induce u from a finite action set.

        Args:
            actions: One (payoff in state 0, payoff in state 1) pair per action
        """
        table = np.asarray(actions, dtype=float)
        if table.ndim != 2 or table.shape[1] != 2 or table.shape[0] == 0:
            raise ModelError("actions must be a non-empty list of (payoff0, payoff1) pairs")

        def upper_envelope(p):
            return np.max(np.outer(1.0 - p, table[:, 0]) + np.outer(p, table[:, 1]), axis=1)

        return cls.from_function(upper_envelope, cost, lam, pi, r, kappa, **kwargs)

    @classmethod
    def from_table(cls, beliefs: Sequence[float], values: Sequence[float], cost: CostSpec,
                   lam: float, pi: float, r: float, kappa: float = 0.0, **kwargs) -> "Problem":
        """u given as a (belief, value) table, interpolated onto the grid."""
        beliefs = np.asarray(beliefs, dtype=float)
        if beliefs.size < 2 or np.any(np.diff(beliefs) <= 0):
            raise ModelError("utility table beliefs must be strictly increasing")
        values = np.asarray(values, dtype=float)
        return cls.from_function(lambda p: np.interp(p, beliefs, values), cost, lam, pi, r, kappa, **kwargs)

    def with_kappa(self, kappa: float) -> "Problem":
        return replace(self, kappa=kappa)

    def with_lambda(self, lam: float) -> "Problem":
        return replace(self, lam=lam)

    # ── cached derived quantities ────────────────────────────────────────────

    @property
    def grid(self) -> np.ndarray:
        return self.u.grid

    @cached_property
    def pi_index(self) -> int:
        return self.u.node_index(self.pi, atol=0.0)

    @cached_property
    def c(self) -> GridFunction:
        return self.u.with_values(self.cost.value(self.grid))

    @cached_property
    def c_prime(self) -> GridFunction:
        return self.u.with_values(self.cost.derivative(self.grid, grid=self.grid))

    @cached_property
    def paths(self) -> PathIntegrator:
        return PathIntegrator(self.grid, self.pi, self.lam, self.r)

    @cached_property
    def no_info_value(self) -> GridFunction:
        """v_lower: value of never acquiring information."""
        return self.u.with_values(self.paths.node_integrals(self.u.values))

    @property
    def is_symmetric(self) -> bool:
        """True when pi = 1/2 and u, c are symmetric under p -> 1 - p on the grid."""
        if self.pi != 0.5 or not np.allclose(self.grid, 1.0 - self.grid[::-1], atol=1e-12):
            return False
        return (np.allclose(self.u.values, self.u.values[::-1], atol=1e-10)
                and np.allclose(self.c.values, self.c.values[::-1], atol=1e-10))

    def describe(self) -> dict:
        return {
            "lambda": self.lam, "pi": self.pi, "r": self.r, "kappa": self.kappa,
            "cost": self.cost.kind, "scale": self.cost.scale, "nodes": int(self.grid.size),
            "symmetric": self.is_symmetric,
        }


# ── belief drift ─────────────────────────────────────────────────────────────

def drift(p, t, problem: Problem):
    """p_t = e^{-lam t} p + (1 - e^{-lam t}) pi."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError(f"drift duration must be non-negative, got {t}")
    decay = np.exp(-problem.lam * t)
    out = problem.pi + (np.asarray(p, dtype=float) - problem.pi) * decay
    return float(out) if np.ndim(out) == 0 else out


def wait_time(q: float, p: float, problem: Problem) -> float:
    """
    Time for the drift started at q to reach p.

    Returns math.inf when p = pi != q (pi is only approached asymptotically).
    """
    pi = problem.pi
    if q == p:
        return 0.0
    if (q - pi) * (p - pi) < 0:
        raise DomainError(f"beliefs {q} and {p} straddle pi={pi}; drift cannot connect them")
    if abs(p - pi) > abs(q - pi):
        raise DomainError(f"belief {p} is farther from pi={pi} than {q}; drift moves toward pi")
    if p == pi:
        return math.inf
    return math.log((pi - q) / (pi - p)) / problem.lam


def wait_times(q, p, problem: Problem) -> np.ndarray:
    """Vectorized wait_time without domain checks (inf where p = pi != q)."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log(np.abs(problem.pi - q) / np.abs(problem.pi - p)) / problem.lam
    return np.where(q == p, 0.0, out)


# ── discounted integrals along the drift ─────────────────────────────────────

@lru_cache(maxsize=32)
def _jacobi_rule(n: int, a: float) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes s in (0,1] and weights for int_0^1 s^{a-1} h(s) ds."""
    x, w = roots_jacobi(n, 0.0, a - 1.0)
    return (1.0 + x) / 2.0, w * 2.0 ** (-a)


def discounted_path_integral(g: GridFunction, p, problem: Problem, method: str = "quadrature"):
    """
    int_0^inf e^{-rt} g(p_t) dt along the drift from belief(s) p.

    Args:
        g: Integrand on the belief grid (linearly interpolated)
        p: Starting belief or array of beliefs
        problem: Supplies lam, pi and r
        method: "quadrature" substitutes s = e^{-lam t} and applies a fixed
            Gauss-Jacobi rule with weight s^{r/lam - 1}, exact for affine g;
            "exact" integrates the piecewise-linear interpolant segment by segment

    Returns:
        Float for scalar p, array otherwise
    """
    p_arr = np.asarray(p, dtype=float)
    if np.any((p_arr < 0) | (p_arr > 1)):
        raise DomainError("beliefs must lie in [0, 1]")

    if method == "exact":
        return problem.paths.integral(g.values, p_arr)
    if method != "quadrature":
        raise ValueError(f"unknown integration method '{method}'")

    s, w = _jacobi_rule(problem.quad_nodes, problem.r / problem.lam)
    beliefs = problem.pi + np.multiply.outer(p_arr - problem.pi, s)
    out = g(beliefs) @ w / problem.lam
    return float(out) if np.ndim(out) == 0 else out


def virtual_flow(problem: Problem) -> GridFunction:
    """f(p) = u(p) - r c(p) + lam (pi - p) c'(p) on the grid."""
    grid = problem.grid
    drift_term = problem.lam * (problem.pi - grid) * problem.c_prime.values
    return problem.u.with_values(problem.u.values - problem.r * problem.c.values + drift_term)


def experiment_cost(experiment: Experiment, p: float, problem: Problem) -> float:
    """sum_i w_i c(q_i) - c(p) + kappa for a Bayes-plausible experiment at p."""
    experiment.check_bayes_plausible(p)
    posteriors = np.asarray(experiment.posteriors, dtype=float)
    weights = np.asarray(experiment.weights, dtype=float)
    variable = float(weights @ np.atleast_1d(problem.cost.value(posteriors))) - problem.cost.value(p)
    return variable + problem.kappa


def value_bounds(problem: Problem) -> Tuple[GridFunction, GridFunction]:
    """
    Ex-ante bounds (v_lower, v_upper) on the value function.

    v_lower integrates u along the drift (never acquire information) and
    v_upper integrates Cav[u] (costless full flexibility).
    """
    from infocycles.envelope import concave_envelope

    lower = problem.no_info_value
    cav_u = concave_envelope(problem.u).cav
    upper = lower.with_values(problem.paths.node_integrals(cav_u.values))
    return lower, upper.maximum(lower)


def net_bounds(problem: Problem) -> Tuple[GridFunction, GridFunction]:
    """Bounds on the net value w = v - c."""
    lower, upper = value_bounds(problem)
    return lower - problem.c, upper - problem.c
