"""Tests for policy extraction: experiment intervals, information region, waits and experiments."""

import math

import numpy as np
import pytest

from infocycles.model import GridFunction, NotInInfoRegionError, wait_time
from infocycles.policy import extract_policy, optimal_experiment, optimal_wait_time, residual_value

from conftest import SYNTHETIC_GRID, SYNTHETIC_W

TOL = 1e-12


class TestResidualValue:

    def test_zero_at_contacts(self):
        gamma = residual_value(GridFunction(SYNTHETIC_GRID, SYNTHETIC_W))
        np.testing.assert_allclose(gamma.values[[0, 1, 9, 10]], 0.0)
        assert gamma(0.5) == pytest.approx(0.01)
        assert gamma(0.1) == pytest.approx(0.005)


# ═══════════════════════════════════════════════════════════════════
# EXTRACTION
# ═══════════════════════════════════════════════════════════════════


class TestExtractPolicy:
    """Hand-built w: E* = (0.053, 0.947), I* = [0.183, 0.817]."""

    def test_experiment_intervals(self, synthetic_policy):
        assert synthetic_policy.experiment_intervals == ((0.053, 0.947),)
        assert synthetic_policy.targets == {(0.053, 0.947): (0.053, 0.947)}

    def test_info_region(self, synthetic_policy):
        assert synthetic_policy.info_runs == ((0.183, 0.817),)
        np.testing.assert_allclose(synthetic_policy.info_nodes, [0.183, 0.3, 0.5, 0.7, 0.817])
        assert synthetic_policy.learns

    def test_info_region_excludes_contacts(self, synthetic_policy):
        assert not synthetic_policy.info_mask[[0, 1, 9, 10]].any()

    def test_in_info(self, synthetic_policy):
        assert synthetic_policy.in_info(0.183)
        assert synthetic_policy.in_info(0.25)
        assert not synthetic_policy.in_info(0.15)
        np.testing.assert_array_equal(synthetic_policy.in_info(np.array([0.1, 0.5, 0.9])), [False, True, False])

    def test_next_hit(self, synthetic_policy):
        assert synthetic_policy.next_hit(0.1) == pytest.approx(0.183)
        assert synthetic_policy.next_hit(0.02) == pytest.approx(0.183)
        assert synthetic_policy.next_hit(0.9) == pytest.approx(0.817)
        assert synthetic_policy.next_hit(0.3) == pytest.approx(0.3)

    def test_next_hit_on_trap(self, trap_policy):
        assert trap_policy.info_runs == ((0.183, 0.3), (0.7, 0.817))
        assert math.isnan(trap_policy.next_hit(0.45))
        assert math.isnan(trap_policy.next_hit(0.5))
        assert trap_policy.next_hit(0.1) == pytest.approx(0.183)

    def test_support(self, synthetic_policy):
        q0, q1, w1 = synthetic_policy.support(np.array([0.5, 0.02]))
        np.testing.assert_allclose(q0, [0.053, 0.02])
        np.testing.assert_allclose(q1, [0.947, 0.02])
        np.testing.assert_allclose(w1, [(0.5 - 0.053) / 0.894, 0.0])

    def test_frame(self, synthetic_policy):
        frame = synthetic_policy.to_frame()
        assert list(frame.columns) == ["kind", "left", "right"]
        assert frame["kind"].tolist() == ["experiment_interval", "info_region"]

    def test_summary(self, synthetic_policy):
        summary = synthetic_policy.summary()
        assert summary["info_nodes"] == 5
        assert summary["max_residual"] == pytest.approx(0.01)

    def test_no_learning(self, synthetic_problem):
        concave = GridFunction(SYNTHETIC_GRID, -(SYNTHETIC_GRID - 0.5) ** 2)
        pm = extract_policy(concave, synthetic_problem)
        assert not pm.learns
        assert pm.experiment_intervals == ()
        assert math.isinf(optimal_wait_time(0.2, pm, synthetic_problem))


# ═══════════════════════════════════════════════════════════════════
# OPTIMAL WAIT AND EXPERIMENT
# ═══════════════════════════════════════════════════════════════════


class TestOptimalWaitTime:

    def test_outside_info_region(self, synthetic_policy, synthetic_problem):
        expected = wait_time(0.1, 0.183, synthetic_problem)
        assert optimal_wait_time(0.1, synthetic_policy, synthetic_problem) == pytest.approx(expected)

    def test_inside_info_region(self, synthetic_policy, synthetic_problem):
        assert optimal_wait_time(0.3, synthetic_policy, synthetic_problem) == 0.0

    def test_trap(self, trap_policy, synthetic_problem):
        assert math.isinf(optimal_wait_time(0.45, trap_policy, synthetic_problem))


class TestOptimalExperiment:

    def test_split_onto_interval_ends(self, synthetic_policy):
        e = optimal_experiment(0.5, synthetic_policy)
        assert e.posteriors == (0.053, 0.947)
        assert e.mean == pytest.approx(0.5)
        e.check_bayes_plausible(0.5)

    def test_outside_info_region(self, synthetic_policy):
        with pytest.raises(NotInInfoRegionError):
            optimal_experiment(0.1, synthetic_policy)


class TestBenchmarkPolicy:
    """Entropy benchmark: learning happens around pi and the policy is symmetric."""

    def test_pi_in_info_region(self, benchmark_policy):
        assert benchmark_policy.learns
        assert benchmark_policy.in_info(0.5)

    def test_residual_reaches_kappa(self, benchmark_policy):
        assert benchmark_policy.residual.sup() == pytest.approx(0.01, abs=benchmark_policy.tolerance + 1e-9)

    def test_symmetric_intervals(self, benchmark_policy, benchmark_problem):
        h = float(np.max(np.diff(benchmark_problem.grid)))
        k = benchmark_policy.envelope.interval_index(0.5)
        q0, q1 = benchmark_policy.experiment_intervals[k]
        assert q0 == pytest.approx(1.0 - q1, abs=2 * h)
