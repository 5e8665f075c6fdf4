"""Tests for the mean-variance portfolio application."""

import numpy as np
import pytest
from pydantic import ValidationError

from infocycles.model import CostSpec
from infocycles.portfolio import (
    MarketSpec,
    belief_moments,
    closed_form_share,
    indirect_utility,
    make_problem,
    portfolio_frame,
)

TOL = 1e-10
BELIEFS = np.linspace(0.0, 1.0, 41)


def brute_force_utility(spec: MarketSpec, p: float, n: int = 4001) -> float:
    """Best of the safe asset and every alpha on a fine grid at its optimal exposure."""
    mean, cov = belief_moments(spec, p, total=spec.mean_risk)
    best = spec.s
    for alpha in np.linspace(0.0, 1.0, n):
        m = alpha * mean[0] + (1 - alpha) * mean[1]
        v = alpha ** 2 * cov[0, 0] + (1 - alpha) ** 2 * cov[1, 1] + 2 * alpha * (1 - alpha) * cov[0, 1]
        gamma = min(max((m - spec.s) / (spec.psi * v), 0.0), 1.0)
        if gamma > 0:
            best = max(best, spec.s + gamma * (m - spec.s) - 0.5 * spec.psi * gamma ** 2 * v - spec.z)
    return best


# ═══════════════════════════════════════════════════════════════════
# BENCHMARK MARKET
# ═══════════════════════════════════════════════════════════════════


class TestBenchmarkMarket:
    """Mirror-image assets: alpha* = clip(3p - 1, 0, 1) at full exposure."""

    @pytest.fixture(scope="class")
    def spec(self):
        return MarketSpec.benchmark()

    def test_share_matches_closed_form(self, spec):
        for p in BELIEFS:
            choice = indirect_utility(spec, float(p))
            assert choice.alpha == pytest.approx(float(np.clip(3 * p - 1, 0, 1)), abs=1e-8)
            assert choice.alpha == pytest.approx(closed_form_share(spec, float(p)), abs=1e-8)
            assert choice.gamma == 1.0

    def test_utility_at_even_odds(self, spec):
        assert indirect_utility(spec, 0.5).u == pytest.approx(2.25)

    def test_utility_is_symmetric(self, spec):
        u = portfolio_frame(spec, BELIEFS)["u"].to_numpy()
        np.testing.assert_allclose(u, u[::-1], atol=TOL)

    def test_total_variance_moments(self, spec):
        mean, cov = belief_moments(spec, 0.5, total=True)
        np.testing.assert_allclose(mean, [2.5, 2.5])
        np.testing.assert_allclose(cov, [[4.25, -2.25], [-2.25, 4.25]])
        _, flow = belief_moments(spec, 0.5, total=False)
        np.testing.assert_allclose(flow, [[2.0, 0.0], [0.0, 2.0]])

    def test_fee_creates_safe_plateau_around_pi(self):
        frame = portfolio_frame(MarketSpec.benchmark(z=2.5), BELIEFS)
        safe = np.flatnonzero(frame["gamma"].to_numpy() == 0.0)
        assert safe.size > 0
        np.testing.assert_array_equal(np.diff(safe), 1)
        assert BELIEFS[safe[0]] < 0.5 < BELIEFS[safe[-1]]
        assert frame["gamma"].iloc[0] == 1.0
        assert frame["alpha"].iloc[safe].isna().all()
        np.testing.assert_allclose(frame["u"].iloc[safe], 0.0)


class TestAsymmetricMarket:

    def test_no_closed_form_share(self):
        with pytest.raises(ValueError):
            closed_form_share(MarketSpec.asymmetric(), 0.5)

    def test_at_least_brute_force(self):
        spec = MarketSpec.asymmetric()
        for p in (0.0, 0.2, 0.45, 0.7, 1.0):
            u = indirect_utility(spec, p).u
            expected = brute_force_utility(spec, p)
            assert u >= expected - 1e-12
            assert u == pytest.approx(expected, abs=1e-6)

    def test_mean_risk_lowers_utility(self):
        flow = indirect_utility(MarketSpec.benchmark(), 0.3).u
        total = indirect_utility(MarketSpec.benchmark(mean_risk=True), 0.3).u
        assert total < flow


class TestMarketSpecValidation:

    def test_covariance_must_be_psd(self):
        with pytest.raises(ValidationError):
            MarketSpec.benchmark(cov=(2.5, 0.0))

    def test_psi_positive(self):
        with pytest.raises(ValidationError):
            MarketSpec.benchmark(psi=0.0)

    def test_unknown_field(self):
        with pytest.raises(ValidationError):
            MarketSpec.benchmark(fee=1.0)


class TestMakeProblem:

    def test_samples_indirect_utility(self):
        spec = MarketSpec.benchmark()
        problem = make_problem(spec, CostSpec(kind="log-likelihood-ratio", scale=0.1),
                               lam=0.5, pi=0.5, r=1.0, kappa=0.01, grid_size=101)
        assert problem.grid.size == 101
        assert problem.u(0.5) == pytest.approx(2.25)
        np.testing.assert_allclose(problem.u.values, problem.u.values[::-1], atol=TOL)
