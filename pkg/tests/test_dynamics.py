"""Tests for belief simulation, long-run classification and cycle densities."""

import math

import numpy as np
import pytest

from infocycles.dynamics import (
    CYCLE,
    LEARNING_STOPS,
    NEVER_LEARNS,
    BeliefCycle,
    Trace,
    TraceEvent,
    classify_prior,
    detect_cycle,
    ensemble_beliefs,
    entry_time,
    ergodic_density,
    martingale_table,
    occupation_cdf,
    simulate,
    simulate_paths,
    stationary_density,
)
from infocycles.model import CostSpec, DegenerateCycleError, DomainError, GridFunction, Problem, drift, wait_time
from infocycles.policy import extract_policy
from infocycles.solver import solve
from infocycles.stationary import trap_test

from conftest import TWO_ACTIONS

TOL = 1e-12
# z-score bound for sample-mean checks with fixed seeds
Z_MAX = 4.0


@pytest.fixture(scope="module")
def published_cycle(synthetic_problem):
    return BeliefCycle.from_thresholds(0.053, 0.183, 0.817, 0.947, synthetic_problem)


# ═══════════════════════════════════════════════════════════════════
# SINGLE PATHS
# ═══════════════════════════════════════════════════════════════════


class TestSimulate:
    """Event-driven paths under the hand-built policy."""

    def test_first_jump_at_threshold(self, synthetic_policy, synthetic_problem):
        trace = simulate(synthetic_policy, 0.1, horizon=20.0, seed=1)
        first = trace.jumps[0]
        assert first.time == pytest.approx(wait_time(0.1, 0.183, synthetic_problem))
        assert first.before == pytest.approx(0.183)
        assert first.after in (0.053, 0.947)
        assert first.posteriors == (0.053, 0.947)

    def test_jumps_alternate_with_drift(self, synthetic_policy):
        trace = simulate(synthetic_policy, 0.1, horizon=20.0, seed=1)
        for jump in trace.jumps:
            assert jump.before in (0.183, 0.817)
            assert jump.after in (0.053, 0.947)
        times = [e.time for e in trace.events]
        assert times == sorted(times)

    def test_belief_between_events_follows_drift(self, synthetic_policy, synthetic_problem):
        trace = simulate(synthetic_policy, 0.1, horizon=20.0, seed=1)
        assert trace.belief_at(0.2) == pytest.approx(drift(0.1, 0.2, synthetic_problem))

    def test_jump_at_time_zero_inside_info_region(self, synthetic_policy):
        trace = simulate(synthetic_policy, 0.5, horizon=5.0, seed=2)
        assert trace.events[1].kind == "jump"
        assert trace.events[1].time == 0.0

    def test_trap_prior_absorbs(self, trap_policy):
        trace = simulate(trap_policy, 0.45, horizon=5.0)
        assert [e.kind for e in trace.events] == ["start", "absorb"]

    def test_reproducible(self, synthetic_policy):
        a = simulate(synthetic_policy, 0.1, horizon=20.0, seed=5)
        b = simulate(synthetic_policy, 0.1, horizon=20.0, seed=5)
        assert a.events == b.events

    def test_rejects_non_positive_horizon(self, synthetic_policy):
        with pytest.raises(ValueError):
            simulate(synthetic_policy, 0.1, horizon=0.0)

    def test_simulate_paths(self, synthetic_policy):
        traces = simulate_paths(synthetic_policy, 0.1, horizon=20.0, n_paths=5, seed=3)
        assert [t.path for t in traces] == list(range(5))
        assert all(t.seed == 3 for t in traces)
        again = simulate_paths(synthetic_policy, 0.1, horizon=20.0, n_paths=5, seed=3)
        assert [t.events for t in traces] == [t.events for t in again]

    def test_frame(self, synthetic_policy):
        frame = simulate(synthetic_policy, 0.1, horizon=5.0).to_frame()
        assert list(frame.columns) == ["path", "time", "kind", "belief_before", "belief_after"]
        assert frame["kind"].iloc[0] == "start"


class TestTrace:

    def test_holds_after_confirm(self):
        events = [TraceEvent(0.0, "start", 0.2, 0.2), TraceEvent(1.0, "confirm", 0.3, 0.3)]
        trace = Trace(events, horizon=3.0, pi=0.5, lam=0.5)
        assert trace.belief_at(2.5) == pytest.approx(0.3)
        assert trace.belief_at(0.5) == pytest.approx(0.5 - 0.3 * math.exp(-0.25))

    def test_segments_respect_burn_in(self):
        events = [TraceEvent(0.0, "start", 0.2, 0.2), TraceEvent(1.0, "jump", 0.3, 0.8)]
        trace = Trace(events, horizon=3.0, pi=0.5, lam=0.5)
        start, duration, belief, holding = trace.segments(burn_in=0.5)
        np.testing.assert_allclose(start, [0.5, 1.0])
        np.testing.assert_allclose(duration, [0.5, 2.0])
        assert belief[0] == pytest.approx(0.5 - 0.3 * math.exp(-0.25))
        assert not holding.any()


class TestEntryTime:

    def test_first_landing_on_target(self, synthetic_policy, synthetic_problem, published_cycle):
        trace = simulate(synthetic_policy, 0.1, horizon=20.0, seed=1)
        expected = wait_time(0.1, 0.183, synthetic_problem)
        assert entry_time(trace, published_cycle) == pytest.approx(expected)

    def test_never_enters(self, trap_policy, published_cycle):
        trace = simulate(trap_policy, 0.45, horizon=5.0)
        assert math.isnan(entry_time(trace, published_cycle))


# ═══════════════════════════════════════════════════════════════════
# ENSEMBLES
# ═══════════════════════════════════════════════════════════════════


class TestEnsemble:

    def test_shape_and_start(self, synthetic_policy):
        times = np.linspace(0.0, 5.0, 6)
        samples = ensemble_beliefs(synthetic_policy, 0.1, times, n_paths=100, seed=0)
        assert samples.shape == (100, 6)
        np.testing.assert_allclose(samples[:, 0], 0.1)

    def test_reproducible(self, synthetic_policy):
        times = np.linspace(0.0, 5.0, 6)
        a = ensemble_beliefs(synthetic_policy, 0.1, times, n_paths=200, seed=4, block_size=64)
        b = ensemble_beliefs(synthetic_policy, 0.1, times, n_paths=200, seed=4, block_size=64)
        np.testing.assert_array_equal(a, b)

    def test_beliefs_stay_in_cycle_band(self, synthetic_policy):
        samples = ensemble_beliefs(synthetic_policy, 0.5, [2.0, 4.0], n_paths=500, seed=1)
        assert np.all((samples >= 0.053 - TOL) & (samples <= 0.947 + TOL))
        assert not np.any((samples > 0.183 + TOL) & (samples < 0.817 - TOL))

    def test_martingale_property(self, synthetic_policy, synthetic_problem):
        times = np.linspace(0.0, 10.0, 11)
        samples = ensemble_beliefs(synthetic_policy, 0.3, times, n_paths=20000, seed=11)
        table = martingale_table(samples, times, synthetic_problem)
        assert len(table) == 10
        assert (table["z"].abs() < Z_MAX).all()

    def test_rejects_unsorted_times(self, synthetic_policy):
        with pytest.raises(ValueError):
            ensemble_beliefs(synthetic_policy, 0.1, [2.0, 1.0], n_paths=10)


# ═══════════════════════════════════════════════════════════════════
# LONG RUN
# ═══════════════════════════════════════════════════════════════════


class TestBeliefCycle:

    def test_from_thresholds(self, published_cycle, synthetic_problem):
        assert published_cycle.tau0 == pytest.approx(published_cycle.tau1, abs=1e-12)
        assert published_cycle.check_identity(synthetic_problem) == (True, "OK")
        assert not published_cycle.is_degenerate

    def test_order_enforced(self):
        with pytest.raises(DomainError):
            BeliefCycle(q0=0.3, q1=0.9, p0=0.2, p1=0.8, tau0=1.0, tau1=1.0, pi=0.5)

    def test_identity_violation_reported(self, synthetic_problem):
        cycle = BeliefCycle(q0=0.053, q1=0.947, p0=0.183, p1=0.817, tau0=1.0, tau1=0.69, pi=0.5)
        ok, message = cycle.check_identity(synthetic_problem)
        assert not ok
        assert "tau0" in message

    def test_degenerate(self):
        assert BeliefCycle.degenerate_at(0.5).is_degenerate


class TestDetectCycle:

    def test_cycle(self, synthetic_policy, synthetic_problem):
        report = detect_cycle(synthetic_policy, synthetic_problem)
        assert report.outcome == CYCLE
        c = report.cycle
        assert (c.q0, c.p0, c.p1, c.q1) == (0.053, 0.183, 0.817, 0.947)
        assert report.trap_interval is None
        assert "pi_in_info_region" in report.flags

    def test_trap(self, trap_policy, synthetic_problem):
        report = detect_cycle(trap_policy, synthetic_problem)
        assert report.outcome == CYCLE
        assert report.trap_interval == (0.3, 0.7)

    def test_no_learning(self, synthetic_problem):
        grid = synthetic_problem.grid
        pm = extract_policy(GridFunction(grid, -(grid - 0.5) ** 2), synthetic_problem)
        assert detect_cycle(pm, synthetic_problem).outcome == LEARNING_STOPS

    def test_row(self, synthetic_policy, synthetic_problem):
        row = detect_cycle(synthetic_policy, synthetic_problem).as_row()
        assert row["outcome"] == CYCLE
        assert math.isnan(row["trap_low"])
        assert row["q0"] == 0.053

    def test_benchmark_is_symmetric_cycle(self, benchmark_policy, benchmark_problem):
        report = detect_cycle(benchmark_policy, benchmark_problem)
        assert report.outcome == CYCLE
        c = report.cycle
        h = float(np.max(np.diff(benchmark_problem.grid)))
        assert c.q0 < c.p0 < 0.5 < c.p1 < c.q1
        assert c.p0 == pytest.approx(1.0 - c.p1, abs=2 * h)
        assert c.check_identity(benchmark_problem)[0]


class TestClassifyPrior:

    def test_enters_cycle(self, synthetic_policy, synthetic_problem):
        report = classify_prior(0.1, synthetic_policy, synthetic_problem)
        assert report.outcome == CYCLE
        assert report.entry_time == pytest.approx(wait_time(0.1, 0.183, synthetic_problem))

    def test_trap_never_learns(self, trap_policy, synthetic_problem):
        report = classify_prior(0.45, trap_policy, synthetic_problem)
        assert report.outcome == NEVER_LEARNS

    def test_outside_trap_enters(self, trap_policy, synthetic_problem):
        assert classify_prior(0.02, trap_policy, synthetic_problem).outcome == CYCLE


class TestTrapAgreement:
    """Cycle-search trap test against the solved policy, one problem per pi."""

    @pytest.mark.slow
    @pytest.mark.parametrize("pi", [0.02, 0.1, 0.18, 0.26, 0.34, 0.42, 0.5, 0.58, 0.66, 0.74, 0.82, 0.9, 0.98])
    def test_trap_test_matches_classification(self, pi):
        problem = Problem.from_actions(TWO_ACTIONS, CostSpec(kind="entropy", scale=0.1),
                                       lam=0.5, pi=pi, r=1.0, kappa=0.01, grid_size=101)
        result = solve(problem, tol=1e-8)
        pm = extract_policy(result.w, problem, result.bracket.gap)
        report = classify_prior(pi, pm, problem)
        assert trap_test(pi, problem, on_grid=True) == (report.outcome == NEVER_LEARNS)


# ═══════════════════════════════════════════════════════════════════
# DENSITIES
# ═══════════════════════════════════════════════════════════════════


class TestErgodicDensity:

    def test_uniform_halves(self, published_cycle):
        density = ergodic_density(published_cycle)
        np.testing.assert_allclose(density.masses, [0.5, 0.5])
        assert density.cdf(0.5) == pytest.approx(0.5)
        assert density.cdf(1.0) == pytest.approx(1.0)

    def test_degenerate_rejected(self):
        with pytest.raises(DegenerateCycleError):
            ergodic_density(BeliefCycle.degenerate_at(0.5))


class TestStationaryDensity:
    """Occupation density proportional to 1 / |pi - p| on each side."""

    def test_symmetric_masses(self, published_cycle, synthetic_problem):
        density = stationary_density(published_cycle, synthetic_problem)
        assert density.mass0 == pytest.approx(0.5)
        assert density.cdf(published_cycle.p0) == pytest.approx(0.5)
        assert density.cdf(published_cycle.q1) == pytest.approx(1.0)
        assert density.cdf(published_cycle.q0) == pytest.approx(0.0, abs=TOL)

    def test_pdf_shape(self, published_cycle, synthetic_problem):
        density = stationary_density(published_cycle, synthetic_problem)
        assert density.pdf(0.15) > density.pdf(0.06)
        assert density.pdf(0.5) == 0.0

    def test_asymmetric_masses(self, synthetic_problem):
        cycle = BeliefCycle.from_thresholds(0.075, 0.248, 0.867, 0.963, synthetic_problem)
        density = stationary_density(cycle, synthetic_problem)
        time0 = (cycle.q1 - cycle.p1) * cycle.tau0
        time1 = (cycle.p0 - cycle.q0) * cycle.tau1
        assert density.mass0 == pytest.approx(time0 / (time0 + time1))
        assert sum(density.masses) == pytest.approx(1.0)

    @pytest.mark.slow
    def test_matches_long_simulation(self, synthetic_policy, synthetic_problem, published_cycle):
        # side visits are autocorrelated, so the horizon has to be long
        trace = simulate(synthetic_policy, 0.5, horizon=40000.0, seed=8)
        density = stationary_density(published_cycle, synthetic_problem)
        x = np.linspace(0.06, 0.94, 23)
        empirical = occupation_cdf(trace, x, burn_in=10.0)
        assert np.max(np.abs(empirical - density.cdf(x))) < 0.03

    def test_degenerate_rejected(self, synthetic_problem):
        with pytest.raises(DegenerateCycleError):
            stationary_density(BeliefCycle.degenerate_at(0.5), synthetic_problem)


class TestOccupationCdf:

    def test_single_drift(self, synthetic_problem):
        trace = Trace([TraceEvent(0.0, "start", 0.1, 0.1)], horizon=2.0, pi=0.5, lam=0.5)
        midpoint = drift(0.1, 1.0, synthetic_problem)
        assert occupation_cdf(trace, midpoint) == pytest.approx(0.5)
        assert occupation_cdf(trace, 0.05) == 0.0
        assert occupation_cdf(trace, 0.9) == pytest.approx(1.0)
