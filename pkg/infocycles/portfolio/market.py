"""
Mean-variance portfolio choice under state uncertainty.

An investor splits a unit flow budget between a safe asset with return s
and a risky portfolio holding share alpha of asset A and 1 - alpha of B.
Risky exposure gamma earns

    (1 - gamma) s + gamma m(alpha, p) - (psi / 2) gamma^2 V(alpha, p) - z 1{gamma > 0}

where m and V are the belief-weighted moments. For fixed alpha the optimal
gamma is clip((m - s) / (psi V), 0, 1), so only alpha needs a search.
"""

import logging
import math
from typing import NamedTuple, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.optimize import minimize_scalar

from infocycles.model.costs import CostSpec
from infocycles.model.grid import DEFAULT_GRID_SIZE
from infocycles.model.problem import Problem

logger = logging.getLogger(__name__)

ALPHA_GRID_POINTS = 513
ALPHA_XTOL = 1e-10
PSD_TOL = 1e-12

Pair = Tuple[float, float]


class MarketSpec(BaseModel):
    """
    Two risky assets whose return moments depend on the state.

    Pairs are (state 0, state 1). With mean_risk=False the risky variance
    is the flow variance p var(1) + (1-p) var(0); with mean_risk=True the
    dispersion of the state-dependent means is added (law of total variance).
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    s: float = 0.0
    m_a: Pair
    m_b: Pair
    var_a: Pair
    var_b: Pair
    cov: Pair = (0.0, 0.0)
    psi: float = Field(gt=0)
    z: float = Field(default=0.0, ge=0)
    mean_risk: bool = False

    @model_validator(mode="after")
    def _check_covariances(self) -> "MarketSpec":
        for state in (0, 1):
            va, vb, c = self.var_a[state], self.var_b[state], self.cov[state]
            if va < 0 or vb < 0:
                raise ValueError(f"variances must be non-negative in state {state}")
            if c * c > va * vb + PSD_TOL:
                raise ValueError(f"covariance matrix of state {state} is not positive semi-definite")
        return self

    @classmethod
    def benchmark(cls, **overrides) -> "MarketSpec":
        """Mirror-image assets: means 1 and 4 swap across states, variance 2, no correlation."""
        params = dict(s=0.0, m_a=(1.0, 4.0), m_b=(4.0, 1.0), var_a=(2.0, 2.0), var_b=(2.0, 2.0),
                      cov=(0.0, 0.0), psi=0.5)
        params.update(overrides)
        return cls(**params)

    @classmethod
    def asymmetric(cls, **overrides) -> "MarketSpec":
        """State 1 is riskier and correlated; a broker's fee of 2.5 applies."""
        params = dict(s=0.0, m_a=(1.0, 5.0), m_b=(4.0, 2.0), var_a=(2.0, 4.0), var_b=(2.0, 4.0),
                      cov=(0.0, 0.5), psi=0.5, z=2.5)
        params.update(overrides)
        return cls(**params)


class PortfolioChoice(NamedTuple):
    u: float
    gamma: float
    alpha: float  # NaN when the safe asset alone is optimal


def belief_moments(spec: MarketSpec, p: float, total: bool = True) -> Tuple[np.ndarray, np.ndarray]:
    """
    Mean vector and covariance matrix of (A, B) returns at belief p.

    With total=True the covariance includes p(1-p) dm dm^T, the spread of
    the state means.
    """
    means = np.array([spec.m_a, spec.m_b], dtype=float).T           # rows: state
    covs = np.array([[[spec.var_a[k], spec.cov[k]], [spec.cov[k], spec.var_b[k]]] for k in (0, 1)])
    mean = (1.0 - p) * means[0] + p * means[1]
    cov = (1.0 - p) * covs[0] + p * covs[1]
    if total:
        dm = means[1] - means[0]
        cov = cov + p * (1.0 - p) * np.outer(dm, dm)
    return mean, cov


def _risky_value(alpha, mean: np.ndarray, cov: np.ndarray, spec: MarketSpec):
    """(value, gamma) of the best exposure to the alpha-portfolio, before the fee."""
    alpha = np.asarray(alpha, dtype=float)
    m = alpha * mean[0] + (1.0 - alpha) * mean[1]
    v = alpha ** 2 * cov[0, 0] + (1.0 - alpha) ** 2 * cov[1, 1] + 2.0 * alpha * (1.0 - alpha) * cov[0, 1]
    excess = m - spec.s
    with np.errstate(divide="ignore", invalid="ignore"):
        gamma = np.where(v > 0, np.clip(excess / (spec.psi * v), 0.0, 1.0), (excess > 0).astype(float))
    value = spec.s + gamma * excess - 0.5 * spec.psi * gamma ** 2 * v
    return value, gamma


def _vertex_share(mean: np.ndarray, cov: np.ndarray, spec: MarketSpec) -> Optional[float]:
    """Unconstrained optimum of m - (psi/2) V over alpha at full exposure, clipped to [0, 1]."""
    a2 = cov[0, 0] + cov[1, 1] - 2.0 * cov[0, 1]
    if a2 <= 0:
        return None
    a1 = -2.0 * cov[1, 1] + 2.0 * cov[0, 1]
    return float(np.clip(((mean[0] - mean[1]) - 0.5 * spec.psi * a1) / (spec.psi * a2), 0.0, 1.0))


def indirect_utility(spec: MarketSpec, p: float) -> PortfolioChoice:
    """
    Best flow payoff at belief p.

    The alpha search runs on a 513-point grid, refines the best cell with a
    bounded scalar minimizer, and also tries the analytic full-exposure
    share, which wins ties. The fee is paid only with risky exposure.
    """
    mean, cov = belief_moments(spec, p, total=spec.mean_risk)
    alphas = np.linspace(0.0, 1.0, ALPHA_GRID_POINTS)
    values, _ = _risky_value(alphas, mean, cov, spec)
    k = int(np.argmax(values))
    best_alpha, best_value = float(alphas[k]), float(values[k])

    lo, hi = alphas[max(k - 1, 0)], alphas[min(k + 1, alphas.size - 1)]
    res = minimize_scalar(lambda a: -float(_risky_value(a, mean, cov, spec)[0]),
                          bounds=(lo, hi), method="bounded", options={"xatol": ALPHA_XTOL})
    if res.success and -res.fun > best_value:
        best_alpha, best_value = float(res.x), -float(res.fun)

    vertex = _vertex_share(mean, cov, spec)
    if vertex is not None:
        vertex_value = float(_risky_value(vertex, mean, cov, spec)[0])
        if vertex_value >= best_value - 1e-14 * max(1.0, abs(best_value)):
            best_alpha, best_value = vertex, max(vertex_value, best_value)

    gamma = float(_risky_value(best_alpha, mean, cov, spec)[1])
    risky = best_value - spec.z
    if gamma <= 0.0 or risky <= spec.s:
        return PortfolioChoice(spec.s, 0.0, math.nan)
    return PortfolioChoice(risky, gamma, best_alpha)


def closed_form_share(spec: MarketSpec, p: float) -> float:
    """alpha*(p) = clip(1/2 (1 + (m_A(p) - m_B(p)) / (psi sigma^2)), 0, 1) for equal, uncorrelated variances."""
    mean, cov = belief_moments(spec, p, total=spec.mean_risk)
    if not (np.isclose(cov[0, 0], cov[1, 1]) and cov[0, 1] == 0.0):
        raise ValueError("closed-form share needs equal variances and zero covariance")
    return float(np.clip(0.5 * (1.0 + (mean[0] - mean[1]) / (spec.psi * cov[0, 0])), 0.0, 1.0))


def portfolio_frame(spec: MarketSpec, grid) -> pd.DataFrame:
    choices = [indirect_utility(spec, float(p)) for p in np.asarray(grid, dtype=float)]
    return pd.DataFrame({
        "belief": np.asarray(grid, dtype=float),
        "u": [c.u for c in choices],
        "gamma": [c.gamma for c in choices],
        "alpha": [c.alpha for c in choices],
    })


def make_problem(spec: MarketSpec, cost: CostSpec, lam: float, pi: float, r: float, kappa: float = 0.0,
                 grid_size: int = DEFAULT_GRID_SIZE, clip: Optional[float] = None, **kwargs) -> Problem:
    """Sample the indirect utility onto a belief grid and bind it into a Problem."""
    def utility(grid):
        return np.array([indirect_utility(spec, float(p)).u for p in grid])

    problem = Problem.from_function(utility, cost, lam, pi, r, kappa, grid_size=grid_size, clip=clip, **kwargs)
    logger.info("portfolio problem on %d nodes: u in [%.6g, %.6g]", problem.grid.size,
                float(problem.u.values.min()), float(problem.u.values.max()))
    return problem
