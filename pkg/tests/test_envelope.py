"""Tests for concave envelopes, experiment intervals and chord supports."""

import numpy as np
import pytest

from infocycles.envelope import chord_support, concave_envelope, upper_hull
from infocycles.model import GridFunction

TOL = 1e-9
N_RANDOM = 1000
N_NODES = 12


def brute_force_cav(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Max over every chord (i, j) spanning node k of the chord value at x[k]; O(N^3)."""
    n = x.size
    out = y.copy()
    for k in range(n):
        for i in range(k + 1):
            for j in range(k, n):
                if i == j:
                    continue
                t = (x[k] - x[i]) / (x[j] - x[i])
                out[k] = max(out[k], (1 - t) * y[i] + t * y[j])
    return out


# ═══════════════════════════════════════════════════════════════════
# HULL ORACLE
# ═══════════════════════════════════════════════════════════════════


class TestConcaveEnvelopeOracle:
    """The monotone-stack hull matches the all-chords brute force on random functions."""

    def test_random_grid_functions(self):
        rng = np.random.default_rng(2024)
        for trial in range(N_RANDOM):
            x = np.cumsum(rng.uniform(0.01, 1.0, N_NODES))
            y = rng.normal(size=N_NODES)
            env = concave_envelope(GridFunction(x, y))
            expected = brute_force_cav(x, y)
            scale = max(1.0, float(np.ptp(y)))
            np.testing.assert_allclose(env.cav.values, expected, atol=TOL * scale, rtol=0,
                                       err_msg=f"trial {trial}")

    def test_envelope_is_concave_majorant(self):
        rng = np.random.default_rng(7)
        x = np.linspace(0, 1, 50)
        y = np.sin(8 * x) + rng.normal(scale=0.1, size=50)
        env = concave_envelope(GridFunction(x, y))
        assert np.all(env.cav.values >= y - TOL)
        slopes = np.diff(env.cav.values) / np.diff(x)
        # contact nodes snap onto g, which can bend the slopes by tol / spacing
        assert np.all(np.diff(slopes) <= 1e-6)


# ═══════════════════════════════════════════════════════════════════
# EXPERIMENT INTERVALS
# ═══════════════════════════════════════════════════════════════════


class TestExperimentIntervals:

    def test_single_valley(self):
        env = concave_envelope(GridFunction([0.0, 0.25, 0.5, 0.75, 1.0], [0.0, -1.0, -1.5, -1.0, 0.0]))
        assert env.intervals == ((0.0, 1.0),)
        assert env.interval_nodes == ((0, 4),)
        np.testing.assert_allclose(env.cav.values, 0.0, atol=TOL)
        np.testing.assert_allclose(env.gap.values, [0.0, 1.0, 1.5, 1.0, 0.0])

    def test_two_valleys(self):
        x = np.linspace(0, 1, 7)
        y = np.array([0.0, -1.0, 0.08, 0.1, 0.08, -1.0, 0.0])
        env = concave_envelope(GridFunction(x, y))
        assert env.interval_nodes == ((0, 2), (4, 6))
        assert env.interval_index(x[1]) == 0
        assert env.interval_index(x[5]) == 1
        assert env.interval_index(x[3]) is None

    def test_concave_function_has_no_intervals(self):
        x = np.linspace(0, 1, 11)
        env = concave_envelope(GridFunction(x, -(x - 0.3) ** 2))
        assert env.intervals == ()
        assert env.contact.all()

    def test_collinear_points_are_contacts(self):
        x = np.linspace(0, 1, 6)
        env = concave_envelope(GridFunction(x, 2 * x + 1))
        assert env.intervals == ()
        np.testing.assert_allclose(env.cav.values, 2 * x + 1)

    def test_frame(self):
        env = concave_envelope(GridFunction([0.0, 0.5, 1.0], [0.0, -1.0, 0.0]))
        frame = env.to_frame()
        assert list(frame.columns) == ["belief", "g", "cav", "in_interval"]
        assert frame["in_interval"].tolist() == [0, 1, 0]


class TestUpperHull:

    def test_concave_points_all_on_hull(self):
        x = np.linspace(0, 1, 9)
        np.testing.assert_array_equal(upper_hull(x, -(x ** 2)), np.arange(9))

    def test_convex_points_keep_endpoints(self):
        x = np.linspace(0, 1, 9)
        np.testing.assert_array_equal(upper_hull(x, x ** 2), [0, 8])


# ═══════════════════════════════════════════════════════════════════
# CHORD SUPPORT
# ═══════════════════════════════════════════════════════════════════


class TestChordSupport:
    """Bayes-plausible split onto the ends of the interval containing p."""

    @pytest.fixture
    def env(self):
        return concave_envelope(GridFunction([0.0, 0.25, 0.5, 0.75, 1.0], [0.5, -1.0, -1.5, -1.0, 0.0]))

    def test_inside(self, env):
        support = chord_support(0.4, env)
        assert (support.q0, support.q1) == (0.0, 1.0)
        assert support.weight1 == pytest.approx(0.4)
        assert (1 - support.weight1) * support.q0 + support.weight1 * support.q1 == pytest.approx(0.4)

    def test_contact_point_is_degenerate(self, env):
        support = chord_support(1.0, env)
        assert support.degenerate
        assert support.weight1 == 0.0

    def test_outside_grid_is_degenerate(self, env):
        assert chord_support(1.5, env).degenerate
