"""
The kappa = 0 problem: closed-form long-run value and wait-or-confirm policies.

Without a fixed cost the net value w0 is the discounted path integral of
Cav[f] inside the contact interval of Cav[f] around pi. There the belief
sits on an endpoint ("confirming") and jumps to the other endpoint at the
exponential rate that keeps the belief a compensated martingale:

    rho(p) = lam (pi - p) / (q(p) - p)

Short-run instant regions away from pi have no closed form; they are read
off a small-kappa solve as the set where the net value is locally affine.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np
import pandas as pd

from infocycles.dynamics.simulate import DEFAULT_BLOCK, StepFn, Trace, TraceEvent, run_ensemble
from infocycles.envelope import EnvelopeResult, concave_envelope
from infocycles.model.errors import DomainError
from infocycles.model.grid import GridFunction
from infocycles.model.problem import Problem, virtual_flow, wait_time, wait_times
from infocycles.policy import extract_policy
from infocycles.solver import solve
from infocycles.stationary.payoffs import drift_segment_flow, flow_at, no_info_net_value

logger = logging.getLogger(__name__)

DEFAULT_PILOT_KAPPA = 1e-3
AFFINE_RTOL = 1e-7
PILOT_SOLVE_RTOL = 1e-8
POINT_ATOL = 1e-12


class ConfirmationPoint(NamedTuple):
    belief: float
    target: float
    rate: float


def confirmation_rate(p: float, q: float, problem: Problem) -> float:
    """rho = lam (pi - p) / (q - p): jump intensity that exactly offsets the drift at p."""
    return problem.lam * (problem.pi - p) / (q - p)


@dataclass(frozen=True, eq=False)
class WaitOrConfirmPolicy:
    """
    Instant-jump intervals, their confirmation points, and the long-run interval.

    Beliefs strictly inside an instant interval split onto its endpoints at
    once. The endpoint met first by the drift is a confirmation point: the
    belief holds there and jumps to the other endpoint at its rate. Every
    other belief drifts toward pi.
    """
    problem: Problem
    instant_intervals: Tuple[Tuple[float, float], ...]
    confirmation_points: Tuple[ConfirmationPoint, ...]
    longrun_interval: Optional[Tuple[float, float]] = None
    diagnostics: Dict[str, float] = field(default_factory=dict)

    @property
    def rates(self) -> Optional[Tuple[float, float]]:
        """(rho0, rho1) of the long-run interval endpoints."""
        if self.longrun_interval is None:
            return None
        q0, q1 = self.longrun_interval
        return (confirmation_rate(q0, q1, self.problem), confirmation_rate(q1, q0, self.problem))

    @property
    def is_pure_waiting(self) -> bool:
        return not self.instant_intervals

    def _arrays(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        points = np.array(self.confirmation_points, dtype=float).reshape(-1, 3)
        return points[:, 0], points[:, 1], points[:, 2]

    def instant_split(self, p):
        """(q0, q1, weight1) for beliefs strictly inside an instant interval; q0 = q1 = p elsewhere."""
        p = np.asarray(p, dtype=float)
        q0, q1, w1 = p.copy(), p.copy(), np.zeros_like(p)
        for a, b in self.instant_intervals:
            inside = (p > a + POINT_ATOL) & (p < b - POINT_ATOL)
            q0 = np.where(inside, a, q0)
            q1 = np.where(inside, b, q1)
            w1 = np.where(inside, (p - a) / (b - a), w1)
        return q0, q1, w1

    def confirmation_index(self, p) -> np.ndarray:
        """Index of the confirmation point at belief p, -1 where there is none."""
        beliefs, _, _ = self._arrays()
        p = np.atleast_1d(np.asarray(p, dtype=float))
        if beliefs.size == 0:
            return np.full(p.shape, -1)
        match = np.abs(p[:, None] - beliefs[None, :]) <= POINT_ATOL
        return np.where(match.any(axis=1), match.argmax(axis=1), -1)

    def next_confirmation(self, p) -> np.ndarray:
        """First confirmation point met by the drift from p (excluding p itself); NaN when none."""
        beliefs, _, _ = self._arrays()
        p = np.atleast_1d(np.asarray(p, dtype=float))
        if beliefs.size == 0:
            return np.full(p.shape, np.nan)
        pi = self.problem.pi
        P = p[:, None]
        B = beliefs[None, :]
        ahead = ((B - pi) * (P - pi) > 0) & (np.abs(B - pi) < np.abs(P - pi) - POINT_ATOL)
        dist = np.where(ahead, np.abs(B - pi), -np.inf)
        best = dist.argmax(axis=1)
        return np.where(ahead.any(axis=1), beliefs[best], np.nan)

    def to_frame(self) -> pd.DataFrame:
        rows = [{"kind": "instant_interval", "belief": math.nan, "left": a, "right": b,
                 "target": math.nan, "rate": math.nan} for a, b in self.instant_intervals]
        rows += [{"kind": "confirmation_point", "belief": c.belief, "left": math.nan, "right": math.nan,
                  "target": c.target, "rate": c.rate} for c in self.confirmation_points]
        if self.longrun_interval is not None:
            q0, q1 = self.longrun_interval
            rows.append({"kind": "longrun_interval", "belief": math.nan, "left": q0, "right": q1,
                         "target": math.nan, "rate": math.nan})
        return pd.DataFrame(rows, columns=["kind", "belief", "left", "right", "target", "rate"])


# ── closed-form long run ─────────────────────────────────────────────────────

def _flow_envelope(problem: Problem) -> EnvelopeResult:
    return concave_envelope(virtual_flow(problem.with_kappa(0.0)))


def longrun_interval(problem: Problem) -> Optional[Tuple[float, float]]:
    """Contact interval of Cav[f] containing pi, or None when Cav[f](pi) = f(pi)."""
    env = _flow_envelope(problem)
    k = env.interval_index(problem.pi)
    return None if k is None else env.intervals[k]


def w0_closed_form(p, problem: Problem):
    """
    Net value of the kappa = 0 problem inside the long-run interval:
    int_0^inf e^{-rt} Cav[f](p_t) dt along the drift from p.

    Outside the interval the same integral is only an upper bound, so it is
    refused. Without a long-run interval only p = pi is accepted.
    """
    interval = longrun_interval(problem)
    lo, hi = interval if interval is not None else (problem.pi, problem.pi)
    p_arr = np.asarray(p, dtype=float)
    if np.any((p_arr < lo - POINT_ATOL) | (p_arr > hi + POINT_ATOL)):
        raise DomainError(f"closed-form w0 only holds on [{lo:.6g}, {hi:.6g}], got {p}")
    return problem.paths.integral(_flow_envelope(problem).cav.values, p_arr)


# ── policy construction ──────────────────────────────────────────────────────

def _affine_runs(w: GridFunction, threshold: float) -> List[Tuple[int, int]]:
    """
    Inclusive node ranges on which w is affine up to `threshold`.

    A run of consecutive interior nodes i..j with small second differences
    makes w affine on [x[i-1], x[j+1]]. Neighbouring runs separated by a
    kink share that node but stay separate.
    """
    x, y = w.grid, w.values
    h = np.diff(x)
    dy = np.diff(y)
    d2 = dy[1:] - dy[:-1] * h[1:] / h[:-1]
    flat = np.concatenate(([False], np.abs(d2) <= threshold, [False]))
    edges = np.diff(flat.astype(np.int8))
    starts = np.flatnonzero(edges == 1) + 1
    ends = np.flatnonzero(edges == -1)
    return [(int(s) - 1, int(e) + 1) for s, e in zip(starts, ends)]


def _clip_runs(runs: List[Tuple[int, int]], windows) -> List[Tuple[int, int]]:
    """Pieces of `runs` inside each (lo, hi) node window, at least one segment long."""
    out = []
    for lo, hi in windows:
        for s, e in runs:
            a, b = max(s, lo), min(e, hi)
            if b > a:
                out.append((a, b))
    return out


def _confirmation_for(interval: Tuple[float, float], problem: Problem) -> List[ConfirmationPoint]:
    a, b = interval
    pi = problem.pi
    if a < pi < b:
        return [ConfirmationPoint(a, b, confirmation_rate(a, b, problem)),
                ConfirmationPoint(b, a, confirmation_rate(b, a, problem))]
    outer, inner = (a, b) if b <= pi else (b, a)
    return [ConfirmationPoint(outer, inner, confirmation_rate(outer, inner, problem))]


def build_woc(problem: Problem, w0: Optional[GridFunction] = None,
              pilot_kappa: float = DEFAULT_PILOT_KAPPA, short_run: bool = True) -> WaitOrConfirmPolicy:
    """
    Wait-or-confirm policy for the kappa = 0 problem.

    Args:
        problem: Problem primitives; its kappa is ignored
        w0: Net value approximating the kappa = 0 value; solved at pilot_kappa when omitted
        pilot_kappa: Small fixed cost standing in for the kappa -> 0 limit
        short_run: Also detect instant regions away from pi

    Returns:
        WaitOrConfirmPolicy. The long-run interval always comes from the
        closed form; short-run intervals are the locally affine runs of w0
        inside its experiment intervals.
    """
    base = problem.with_kappa(0.0)
    longrun = longrun_interval(base)
    intervals: List[Tuple[float, float]] = []
    diagnostics: Dict[str, float] = {}

    if short_run:
        pilot = problem.with_kappa(pilot_kappa)
        gap = 0.0
        if w0 is None:
            scale = max(1.0, float(np.max(np.abs(pilot.u.values))) / pilot.r)
            result = solve(pilot, tol=PILOT_SOLVE_RTOL * scale)
            w0, gap = result.w, result.bracket.gap
        value_range = float(np.ptp(w0.values)) or 1.0
        threshold = max(AFFINE_RTOL * value_range, 4.0 * gap)

        pm = extract_policy(w0, pilot, gap)
        runs = _clip_runs(_affine_runs(w0, threshold), pm.envelope.interval_nodes)
        grid = problem.grid
        affine = np.zeros(grid.size, dtype=bool)
        for s, e in runs:
            a, b = float(grid[s]), float(grid[e])
            affine[s:e + 1] = True
            if a < problem.pi < b:
                continue
            if longrun is not None and a < longrun[1] and b > longrun[0]:
                continue
            intervals.append((a, b))

        # I* excludes contact nodes, so compare on interval interiors only
        affine &= ~pm.envelope.contact
        mismatch = int(np.sum(affine != pm.info_mask))
        diagnostics = {"pilot_kappa": pilot_kappa, "affine_threshold": threshold, "gap": gap,
                       "affine_nodes": int(affine.sum()), "info_nodes": int(pm.info_mask.sum()),
                       "mismatch_nodes": mismatch}
        if mismatch > 2:
            logger.warning("affine set and pilot information region differ on %d nodes", mismatch)

    if longrun is not None:
        intervals.append(longrun)
    intervals.sort()
    points = tuple(point for iv in intervals for point in _confirmation_for(iv, problem))
    logger.info("wait-or-confirm policy: %d instant intervals, long run %s", len(intervals), longrun)
    return WaitOrConfirmPolicy(problem, tuple(intervals), points, longrun, diagnostics)


# ── simulation ───────────────────────────────────────────────────────────────

def simulate_woc(policy: WaitOrConfirmPolicy, p0: float, horizon: float, seed=0, path: int = 0) -> Trace:
    """
    Simulate one wait-or-confirm path.

    Holds at a confirmation point are recorded as `confirm` events (the
    belief stays put until the next event); the jump that ends a hold is a
    `jump` event to the point's target.
    """
    if horizon <= 0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    problem = policy.problem
    rng = np.random.default_rng(seed)
    _, targets, rates = policy._arrays()

    t, p = 0.0, float(p0)
    events = [TraceEvent(0.0, "start", p, p)]
    q0, q1, w1 = (float(v) for v in policy.instant_split(p))
    if q0 != q1:
        q = q1 if rng.random() < w1 else q0
        events.append(TraceEvent(0.0, "jump", p, q, (q0, q1), (1.0 - w1, w1)))
        p = q

    while t < horizon:
        k = int(policy.confirmation_index(p)[0])
        if k >= 0:
            events.append(TraceEvent(t, "confirm", p, p))
            hold = rng.exponential(1.0 / rates[k])
            if t + hold > horizon:
                break
            t += hold
            events.append(TraceEvent(t, "jump", p, float(targets[k])))
            p = float(targets[k])
            continue

        nxt = float(policy.next_confirmation(p)[0])
        if math.isnan(nxt):
            events.append(TraceEvent(t, "absorb", p, p))
            break
        dt = wait_time(p, nxt, problem)
        if t + dt > horizon:
            break
        t += dt
        p = nxt

    seed_value = seed if isinstance(seed, (int, np.integer)) else int(seed.entropy)
    return Trace(events, horizon, problem.pi, problem.lam, seed=int(seed_value), path=path)


def holding_times(trace: Trace, belief: float, atol: float = POINT_ATOL) -> np.ndarray:
    """Durations of completed holds at `belief` (confirm event to the jump that ends it)."""
    out = []
    events = trace.events
    for e, nxt in zip(events, events[1:]):
        if e.kind == "confirm" and abs(e.after - belief) <= atol and nxt.kind == "jump":
            out.append(nxt.time - e.time)
    return np.asarray(out, dtype=float)


def woc_step(policy: WaitOrConfirmPolicy) -> StepFn:
    """Ensemble step: split inside instant intervals, hold at confirmation points, drift otherwise."""
    problem = policy.problem
    _, targets, rates = policy._arrays()

    def step(p, rng):
        q0, q1, w1 = policy.instant_split(p)
        split = q0 != q1
        draws = rng.random(p.shape)
        p = np.where(split, np.where(draws < w1, q1, q0), p)

        k = policy.confirmation_index(p)
        holding = k >= 0
        nxt = policy.next_confirmation(p)
        never = ~holding & np.isnan(nxt)

        hold = np.zeros(p.shape)
        if holding.any():
            hold[holding] = rng.exponential(1.0 / rates[k[holding]])
        drift_dt = wait_times(p, np.where(np.isnan(nxt), p, nxt), problem)
        dt = np.where(holding, hold, np.where(never, np.inf, drift_dt))
        end = np.where(holding, targets[np.maximum(k, 0)] if targets.size else p, np.where(never, p, nxt))
        return p, dt, end, holding

    return step


def woc_ensemble_beliefs(policy: WaitOrConfirmPolicy, p0: float, times, n_paths: int, seed: int = 0,
                         block_size: int = DEFAULT_BLOCK) -> np.ndarray:
    """Beliefs at checkpoint times for n_paths wait-or-confirm paths."""
    return run_ensemble(woc_step(policy), p0, times, n_paths, seed, policy.problem, block_size)


def simulate_woc_payoff(policy: WaitOrConfirmPolicy, p0: float, n_paths: int = 20000, seed: int = 0,
                        tail: float = 1e-8) -> Tuple[float, float]:
    """
    Monte-Carlo discounted virtual-flow payoff E int_0^inf e^{-rt} f(P_t) dt from p0.

    Drift pieces are integrated exactly, a hold at p earns f(p) at a
    constant rate, and jumps are free (kappa = 0). Paths stop once
    e^{-rt} < tail; a path that only drifts from some point on collects
    the no-information value there.

    Returns:
        (mean, standard error)
    """
    problem = policy.problem.with_kappa(0.0)
    r = problem.r
    step = woc_step(policy)
    rng = np.random.default_rng(np.random.SeedSequence(seed))

    p = np.full(n_paths, float(p0))
    t = np.zeros(n_paths)
    acc = np.zeros(n_paths)
    active = np.ones(n_paths, dtype=bool)

    while active.any():
        idx = np.flatnonzero(active)
        start, dt, end, holding = step(p[idx], rng)
        weight = np.exp(-r * t[idx])
        finite = np.isfinite(dt)
        piece = np.empty(idx.size)

        discount = np.exp(-r * np.where(finite, dt, 0.0))
        if holding.any():
            piece[holding] = flow_at(start[holding], problem) * (1.0 - discount[holding]) / r
        moving = ~holding & finite
        if moving.any():
            piece[moving] = drift_segment_flow(start[moving], end[moving], discount[moving], problem)
        forever = ~finite
        if forever.any():
            piece[forever] = no_info_net_value(start[forever], problem)

        acc[idx] += weight * piece
        t[idx] += np.where(finite, dt, np.inf)
        p[idx] = end
        active[idx] = finite & (np.exp(-r * t[idx]) >= tail)

    return float(acc.mean()), float(acc.std(ddof=1) / math.sqrt(n_paths))
