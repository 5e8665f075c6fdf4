"""
Optimal policy extraction from a converged net value function w = v - c.

The residual value of information Gamma w = Cav w - w decides everything:
experiment intervals E* are the runs where Gamma w > 0 (their ends are the
jump targets) and the information region I* is where Gamma w reaches the
fixed cost kappa. Between I* hits beliefs simply drift toward pi.
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Tuple

import numpy as np
import pandas as pd

from infocycles.envelope import EnvelopeResult, chord_support, concave_envelope
from infocycles.model.errors import NotInInfoRegionError
from infocycles.model.grid import GridFunction
from infocycles.model.problem import Experiment, Problem, wait_time

logger = logging.getLogger(__name__)


def residual_value(w: GridFunction) -> GridFunction:
    """Gamma w = Cav w - w (zero at contact nodes)."""
    env = concave_envelope(w)
    return env.cav.with_values(np.where(env.contact, 0.0, env.cav.values - w.values))


def _node_runs(mask: np.ndarray) -> Tuple[Tuple[int, int], ...]:
    """Inclusive (first, last) index pairs of the True runs in mask."""
    edges = np.diff(np.concatenate(([0], mask.astype(np.int8), [0])))
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1) - 1
    return tuple((int(s), int(e)) for s, e in zip(starts, ends))


@dataclass(frozen=True, eq=False)
class PolicyMap:
    """Experiment intervals with their targets and the information region I*."""
    problem: Problem
    envelope: EnvelopeResult
    residual: GridFunction
    info_mask: np.ndarray
    kappa: float
    tolerance: float

    @property
    def grid(self) -> np.ndarray:
        return self.problem.grid

    @property
    def experiment_intervals(self) -> Tuple[Tuple[float, float], ...]:
        return self.envelope.intervals

    @property
    def targets(self) -> Dict[Tuple[float, float], Tuple[float, float]]:
        """Each interval maps to its jump targets, which are its own endpoints."""
        return {interval: interval for interval in self.experiment_intervals}

    @cached_property
    def info_runs(self) -> Tuple[Tuple[float, float], ...]:
        """I* as closed belief ranges [lo, hi] of consecutive nodes."""
        return tuple((float(self.grid[i]), float(self.grid[j])) for i, j in _node_runs(self.info_mask))

    @cached_property
    def _run_arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        runs = np.array(self.info_runs, dtype=float).reshape(-1, 2)
        return runs[:, 0], runs[:, 1]

    @cached_property
    def _interval_arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        ivs = np.array(self.experiment_intervals, dtype=float).reshape(-1, 2)
        return ivs[:, 0], ivs[:, 1]

    @property
    def info_nodes(self) -> np.ndarray:
        return self.grid[self.info_mask]

    @property
    def learns(self) -> bool:
        return bool(self.info_mask.any())

    # ── vectorized queries ───────────────────────────────────────────────────

    def in_info(self, p):
        """True where belief p lies in I*."""
        lo, hi = self._run_arrays
        p_arr = np.atleast_1d(np.asarray(p, dtype=float))
        if lo.size == 0:
            out = np.zeros(p_arr.shape, dtype=bool)
        else:
            idx = np.searchsorted(lo, p_arr, side="right") - 1
            out = (idx >= 0) & (p_arr <= hi[np.clip(idx, 0, None)])
        return bool(out[0]) if np.ndim(p) == 0 else out

    def next_hit(self, p):
        """
        First I* point met by the drift from p (p itself when p is in I*).

        NaN where the path never meets I*. pi itself is only reached from pi.
        """
        lo, hi = self._run_arrays
        pi = self.problem.pi
        p_arr = np.atleast_1d(np.asarray(p, dtype=float))
        hit = np.full(p_arr.shape, np.nan)
        inside = self.in_info(p_arr)
        hit[inside] = p_arr[inside]

        if lo.size:
            right = (p_arr > pi) & ~inside
            idx = np.searchsorted(hi, p_arr[right], side="left") - 1
            cand = hi[np.clip(idx, 0, None)]
            hit[right] = np.where((idx >= 0) & (cand > pi), cand, np.nan)

            left = (p_arr < pi) & ~inside
            idx = np.searchsorted(lo, p_arr[left], side="right")
            cand = lo[np.clip(idx, None, lo.size - 1)]
            hit[left] = np.where((idx < lo.size) & (cand < pi), cand, np.nan)

        return float(hit[0]) if np.ndim(p) == 0 else hit

    def support(self, p) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Vectorized chord support: (q0, q1, weight on q1), degenerate outside E*."""
        a, b = self._interval_arrays
        p_arr = np.atleast_1d(np.asarray(p, dtype=float))
        q0, q1, w1 = p_arr.copy(), p_arr.copy(), np.zeros_like(p_arr)
        if a.size:
            idx = np.clip(np.searchsorted(a, p_arr, side="right") - 1, 0, None)
            inside = (p_arr > a[idx]) & (p_arr < b[idx])
            q0 = np.where(inside, a[idx], p_arr)
            q1 = np.where(inside, b[idx], p_arr)
            w1 = np.where(inside, (p_arr - a[idx]) / np.where(inside, b[idx] - a[idx], 1.0), 0.0)
        return q0, q1, w1

    # ── export ───────────────────────────────────────────────────────────────

    def to_frame(self) -> pd.DataFrame:
        rows = [("experiment_interval", a, b) for a, b in self.experiment_intervals]
        rows += [("info_region", lo, hi) for lo, hi in self.info_runs]
        return pd.DataFrame(rows, columns=["kind", "left", "right"])

    def summary(self) -> dict:
        return {
            "kappa": self.kappa,
            "experiment_intervals": len(self.experiment_intervals),
            "info_runs": len(self.info_runs),
            "info_nodes": int(self.info_mask.sum()),
            "max_residual": float(self.residual.sup()),
            "tolerance": self.tolerance,
        }


def extract_policy(w: GridFunction, problem: Problem, gap: float = 0.0) -> PolicyMap:
    """
    Read the optimal policy off a converged net value function.

    Args:
        w: Net value v - c on the problem grid
        problem: The problem w solves (supplies kappa)
        gap: Bracket gap of the solve; widens the I* test to max(10 gap, 1e-7 kappa)

    Returns:
        PolicyMap; I* may be empty (learning never occurs)
    """
    env = concave_envelope(w)
    gamma = np.where(env.contact, 0.0, env.cav.values - w.values)
    tolerance = max(10.0 * gap, 1e-7 * problem.kappa)

    near_kappa = np.abs(gamma - problem.kappa) <= tolerance
    info_mask = near_kappa & ~env.contact
    if np.any(near_kappa & env.contact) and problem.kappa > 0:
        logger.warning("%d contact nodes matched Gamma w = kappa and were dropped from I*",
                       int(np.sum(near_kappa & env.contact)))

    overshoot = float(np.max(gamma)) - problem.kappa
    if overshoot > tolerance + gap:
        logger.warning("residual value exceeds kappa by %.3e; w may not be converged", overshoot)

    info_mask.flags.writeable = False
    return PolicyMap(problem, env, w.with_values(gamma), info_mask, problem.kappa, tolerance)


def optimal_wait_time(p: float, pm: PolicyMap, problem: Problem) -> float:
    """Time until the drift from p first meets I*; math.inf when it never does."""
    hit = pm.next_hit(p)
    if math.isnan(hit):
        return math.inf
    return wait_time(p, hit, problem)


def optimal_experiment(p: float, pm: PolicyMap) -> Experiment:
    """Least informative optimal experiment at p in I*: split onto its interval ends."""
    if not pm.in_info(p):
        raise NotInInfoRegionError(f"belief {p} is not in the information region")
    q0, q1, weight1 = chord_support(p, pm.envelope)
    return Experiment.binary(q0, q1, weight1)
