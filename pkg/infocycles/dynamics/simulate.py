"""
Event-driven simulation of the belief process.

Beliefs follow the closed-form drift between events, so a path is fully
described by its event list: no time stepping is involved. Random streams
come from numpy SeedSequence spawning, one child per path (or per block of
paths for vectorized ensembles), which keeps results reproducible no matter
how the work is split.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, NamedTuple, Optional, Tuple, Union

import numpy as np
import pandas as pd

from infocycles.model.problem import Problem, drift, wait_time, wait_times
from infocycles.policy import PolicyMap, optimal_experiment

logger = logging.getLogger(__name__)

DEFAULT_BLOCK = 10000
_MAX_INSTANT_JUMPS = 1000

SeedLike = Union[int, np.random.SeedSequence]


class TraceEvent(NamedTuple):
    time: float
    kind: str              # start | jump | confirm | absorb
    before: float
    after: float
    posteriors: Tuple[float, ...] = ()
    weights: Tuple[float, ...] = ()


@dataclass(eq=False)
class Trace:
    """
    Event-timed realization of the belief process on [0, horizon].

    After an event the belief drifts from `after` toward pi, except after a
    `confirm` event where it holds still until the next event.
    """
    events: List[TraceEvent]
    horizon: float
    pi: float
    lam: float
    seed: int = 0
    path: int = 0
    _cache: dict = field(default_factory=dict, repr=False)

    def _arrays(self):
        if "arrays" not in self._cache:
            times = np.array([e.time for e in self.events])
            after = np.array([e.after for e in self.events])
            hold = np.array([e.kind == "confirm" for e in self.events])
            self._cache["arrays"] = (times, after, hold)
        return self._cache["arrays"]

    @property
    def jumps(self) -> List[TraceEvent]:
        return [e for e in self.events if e.kind == "jump"]

    def belief_at(self, t):
        """Belief at time(s) t, right-continuous at jumps."""
        times, after, hold = self._arrays()
        t_arr = np.asarray(t, dtype=float)
        idx = np.searchsorted(times, t_arr, side="right") - 1
        idx = np.clip(idx, 0, None)
        elapsed = t_arr - times[idx]
        out = np.where(hold[idx], after[idx], self.pi + (after[idx] - self.pi) * np.exp(-self.lam * elapsed))
        return float(out) if out.ndim == 0 else out

    def segments(self, burn_in: float = 0.0) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """
        Piecewise-deterministic pieces inside [burn_in, horizon].

        Returns:
            (start_time, duration, start_belief, holding) arrays
        """
        times, after, hold = self._arrays()
        ends = np.append(times[1:], self.horizon)
        start = np.maximum(times, burn_in)
        duration = np.minimum(ends, self.horizon) - start
        keep = duration > 0
        shift = start - times
        belief = np.where(hold, after, self.pi + (after - self.pi) * np.exp(-self.lam * shift))
        return start[keep], duration[keep], belief[keep], hold[keep]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "path": self.path,
            "time": [e.time for e in self.events],
            "kind": [e.kind for e in self.events],
            "belief_before": [e.before for e in self.events],
            "belief_after": [e.after for e in self.events],
        })


def simulate(pm: PolicyMap, p0: float, horizon: float, seed: SeedLike = 0, path: int = 0) -> Trace:
    """
    Simulate one path of the belief process under a policy.

    Args:
        pm: Policy to follow (I* hits trigger the optimal experiment)
        p0: Initial belief; a jump happens at t=0 when p0 is in I*
        horizon: Simulated duration, must be positive
        seed: Integer seed or spawned SeedSequence for this path
        path: Path index recorded on the trace

    Returns:
        Trace with exact event times
    """
    if horizon <= 0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    problem = pm.problem
    rng = np.random.default_rng(seed)

    t, p = 0.0, float(p0)
    events = [TraceEvent(0.0, "start", p, p)]
    instant = 0

    while True:
        if pm.in_info(p):
            experiment = optimal_experiment(p, pm)
            if experiment.is_degenerate or instant >= _MAX_INSTANT_JUMPS:
                logger.warning("degenerate experiment at belief %.6g; path absorbed", p)
                events.append(TraceEvent(t, "absorb", p, p))
                break
            draw = rng.random()
            q = experiment.posteriors[1] if draw < experiment.weights[1] else experiment.posteriors[0]
            events.append(TraceEvent(t, "jump", p, q, experiment.posteriors, experiment.weights))
            p = q
            instant += 1
            continue

        hit = pm.next_hit(p)
        if np.isnan(hit):
            events.append(TraceEvent(t, "absorb", p, p))
            break
        dt = wait_time(p, hit, problem)
        if t + dt > horizon:
            break
        t += dt
        p = hit
        instant = 0

    seed_value = seed if isinstance(seed, (int, np.integer)) else int(seed.entropy)
    return Trace(events, horizon, problem.pi, problem.lam, seed=int(seed_value), path=path)


def simulate_paths(pm: PolicyMap, p0: float, horizon: float, n_paths: int, seed: int = 0) -> List[Trace]:
    """One independent stream per path, spawned from `seed`."""
    children = np.random.SeedSequence(seed).spawn(n_paths)
    traces = [simulate(pm, p0, horizon, child, path=i) for i, child in enumerate(children)]
    for trace in traces:
        trace.seed = seed
    return traces


# ── vectorized ensembles ─────────────────────────────────────────────────────

# step(p, rng) -> (start, dt, end, holding): apply instantaneous jumps at the
# current time, then describe the next deterministic piece of every path
StepFn = Callable[[np.ndarray, np.random.Generator], Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]]


def run_ensemble(step: StepFn, p0: float, times, n_paths: int, seed: int,
                 problem: Problem, block_size: int = DEFAULT_BLOCK) -> np.ndarray:
    """
    Beliefs of n_paths independent paths at the checkpoint `times`.

    Paths are processed in blocks; each block draws from its own spawned
    stream, so the result depends only on (seed, block_size).

    Returns:
        Array of shape (n_paths, len(times))
    """
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0) or np.any(times < 0):
        raise ValueError("checkpoint times must be non-negative and sorted")
    m = times.size
    n_blocks = -(-n_paths // block_size)
    children = np.random.SeedSequence(seed).spawn(n_blocks)
    out = np.empty((n_paths, m))

    for b, child in enumerate(children):
        rng = np.random.default_rng(child)
        lo, hi = b * block_size, min(n_paths, (b + 1) * block_size)
        n = hi - lo
        p = np.full(n, float(p0))
        t = np.zeros(n)
        k = np.zeros(n, dtype=int)
        values = np.empty((n, m))
        active = np.ones(n, dtype=bool)

        while active.any():
            idx = np.flatnonzero(active)
            start, dt, end, holding = step(p[idx], rng)
            t_next = t[idx] + dt
            for _ in range(m):
                kk = k[idx]
                due = kk < m
                due[due] = times[kk[due]] < t_next[due]
                if not due.any():
                    break
                rows = idx[due]
                elapsed = times[kk[due]] - t[rows]
                values[rows, kk[due]] = np.where(holding[due], start[due],
                                                 drift(start[due], elapsed, problem))
                k[rows] += 1
            t[idx] = t_next
            p[idx] = end
            active[idx] = (k[idx] < m) & np.isfinite(t_next)

        out[lo:hi] = values
    return out


def policy_step(pm: PolicyMap) -> StepFn:
    """Ensemble step for a kappa > 0 policy: jump in I*, otherwise drift to the next I* hit."""
    problem = pm.problem

    def step(p, rng):
        p = p.copy()
        for _ in range(_MAX_INSTANT_JUMPS):
            inside = pm.in_info(p)
            q0, q1, w1 = pm.support(p[inside])
            informative = q0 != q1
            if not informative.any():
                break
            draws = rng.random(int(inside.sum()))
            landed = np.where(draws < w1, q1, q0)
            p[inside] = np.where(informative, landed, p[inside])
        hit = pm.next_hit(p)
        never = np.isnan(hit)
        # paths stuck on a degenerate I* node are treated as absorbed
        stuck = pm.in_info(p)
        dt = np.where(never | stuck, np.inf, wait_times(p, np.where(never, p, hit), problem))
        end = np.where(never, p, hit)
        return p, dt, end, np.zeros(p.shape, dtype=bool)

    return step


def ensemble_beliefs(pm: PolicyMap, p0: float, times, n_paths: int, seed: int = 0,
                     block_size: int = DEFAULT_BLOCK) -> np.ndarray:
    """Vectorized beliefs at checkpoint times for n_paths paths under pm."""
    return run_ensemble(policy_step(pm), p0, times, n_paths, seed, pm.problem, block_size)


def martingale_table(samples: np.ndarray, times, problem: Problem,
                     pairs: Optional[List[Tuple[int, int]]] = None) -> pd.DataFrame:
    """
    Compensated martingale check on ensemble samples.

    For checkpoint pairs (i, j) with s = t_j - t_i, the quantity
    P_{t_j} - e^{-lam s} P_{t_i} - (1 - e^{-lam s}) pi has mean zero.

    Returns:
        DataFrame with t, s, gap (sample mean), se, z = gap / se
    """
    times = np.asarray(times, dtype=float)
    if pairs is None:
        pairs = [(i, i + 1) for i in range(times.size - 1)]
    rows = []
    for i, j in pairs:
        s = times[j] - times[i]
        decay = np.exp(-problem.lam * s)
        x = samples[:, j] - decay * samples[:, i] - (1.0 - decay) * problem.pi
        gap = float(x.mean())
        se = float(x.std(ddof=1) / np.sqrt(x.size))
        rows.append({"t": times[i], "s": s, "gap": gap, "se": se,
                     "z": gap / se if se > 0 else (0.0 if gap == 0 else np.inf)})
    return pd.DataFrame(rows)
