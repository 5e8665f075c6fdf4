"""
Long-run behavior of the belief process under a policy.

The structure is read off the PolicyMap geometry: which experiment interval
contains pi, where the drift from each target first meets I*, and whether a
band of beliefs around pi never reaches I* (a learning trap).
"""

import logging
import math
from collections import deque
from dataclasses import asdict, dataclass
from typing import Optional, Tuple

import numpy as np

from infocycles.dynamics.simulate import Trace
from infocycles.envelope import chord_support
from infocycles.model.errors import DomainError
from infocycles.model.problem import Problem, wait_time
from infocycles.policy import PolicyMap

logger = logging.getLogger(__name__)

ORDER_TOL = 1e-12
MAX_BRANCH_DEPTH = 64

CYCLE = "cycle"
LEARNING_STOPS = "learning_stops"
NEVER_LEARNS = "never_learns"


@dataclass(frozen=True)
class BeliefCycle:
    """
    Targets (q0, q1), thresholds (p0, p1) and waiting times (tau0, tau1).

    From target q_i the belief drifts for tau_i until it reaches p_i, where
    an experiment sends it back to q0 or q1.
    """
    q0: float
    q1: float
    p0: float
    p1: float
    tau0: float
    tau1: float
    pi: float

    def __post_init__(self):
        chain = (0.0, self.q0, self.p0, self.pi, self.p1, self.q1, 1.0)
        if any(b - a < -ORDER_TOL for a, b in zip(chain, chain[1:])):
            raise DomainError(
                f"cycle must satisfy 0 <= q0 <= p0 <= pi <= p1 <= q1 <= 1, got "
                f"q0={self.q0}, p0={self.p0}, pi={self.pi}, p1={self.p1}, q1={self.q1}"
            )

    @classmethod
    def from_thresholds(cls, q0: float, p0: float, p1: float, q1: float, problem: Problem) -> "BeliefCycle":
        """Build a cycle with waiting times from the drift identity."""
        return cls(float(q0), float(q1), float(p0), float(p1),
                   wait_time(q0, p0, problem), wait_time(q1, p1, problem), problem.pi)

    @classmethod
    def degenerate_at(cls, pi: float) -> "BeliefCycle":
        return cls(pi, pi, pi, pi, 0.0, 0.0, pi)

    @property
    def is_degenerate(self) -> bool:
        return not (self.q0 < self.p0 < self.pi < self.p1 < self.q1)

    def check_identity(self, problem: Problem, tol: float = 1e-9) -> Tuple[bool, str]:
        """Compare tau_i with (1/lam) log((pi - q_i)/(pi - p_i))."""
        for name, q, p, tau in (("tau0", self.q0, self.p0, self.tau0), ("tau1", self.q1, self.p1, self.tau1)):
            expected = wait_time(q, p, problem)
            if math.isinf(expected) and math.isinf(tau):
                continue
            if abs(expected - tau) > tol:
                return False, f"{name}={tau:.12g} but the drift identity gives {expected:.12g}"
        return True, "OK"

    def as_row(self) -> dict:
        row = asdict(self)
        row.pop("pi")
        return row


@dataclass(frozen=True)
class LongRunReport:
    outcome: str
    cycle: Optional[BeliefCycle] = None
    entry_time: float = math.nan
    trap_interval: Optional[Tuple[float, float]] = None
    flags: Tuple[str, ...] = ()

    def as_row(self) -> dict:
        row = {"outcome": self.outcome, "entry_time": self.entry_time}
        cycle = self.cycle.as_row() if self.cycle else dict.fromkeys(("q0", "q1", "p0", "p1", "tau0", "tau1"), math.nan)
        row.update(cycle)
        trap = self.trap_interval or (math.nan, math.nan)
        row.update({"trap_low": trap[0], "trap_high": trap[1], "flags": ";".join(self.flags)})
        return row


def detect_cycle(pm: PolicyMap, problem: Problem) -> LongRunReport:
    """
    Classify the long run of the policy: a belief cycle or learning stopping.

    The cycle lives in the experiment interval containing pi. Its thresholds
    are the first I* nodes met by the drift from each target, and a trap
    is reported when pi itself is outside I*: priors strictly between the
    nearest I* nodes on either side of pi never acquire information.
    """
    pi = problem.pi
    flags = []
    if pm.in_info(pi):
        flags.append("pi_in_info_region")

    k = pm.envelope.interval_index(pi)
    if k is None:
        return LongRunReport(LEARNING_STOPS, flags=tuple(flags + ["pi_outside_experiment_intervals"]))

    q0, q1 = pm.experiment_intervals[k]
    nodes = pm.info_nodes
    left = nodes[(nodes > q0) & (nodes < pi)]
    right = nodes[(nodes > pi) & (nodes < q1)]
    if left.size == 0 or right.size == 0:
        return LongRunReport(LEARNING_STOPS, flags=tuple(flags + ["thresholds_unreachable"]))

    cycle = BeliefCycle.from_thresholds(q0, left.min(), right.max(), q1, problem)

    trap = None
    if not pm.in_info(pi):
        trap = (float(left.max()), float(right.min()))

    # on a finite grid coincidences are only resolved up to node spacing
    h = float(np.max(np.diff(problem.grid)))
    if min(pi - q0, q1 - pi) <= 2 * h:
        flags.append("target_near_pi")
    if min(cycle.p0 - q0, q1 - cycle.p1) <= h:
        flags.append("threshold_adjacent_to_target")
    if trap is not None and min(pi - trap[0], trap[1] - pi) <= h:
        flags.append("trap_edge_adjacent_to_pi")

    return LongRunReport(CYCLE, cycle, math.nan, trap, tuple(flags))


def classify_prior(p: float, pm: PolicyMap, problem: Problem) -> LongRunReport:
    """
    Trace every branch of the deterministic drift-and-jump tree from prior p.

    Outcome is `cycle` when some branch lands on the long-run cycle targets
    (entry_time = earliest such landing), `learning_stops` when information
    is acquired finitely often on every branch, and `never_learns` when the
    drift from p never meets I*.
    """
    base = detect_cycle(pm, problem)
    cycle = base.cycle
    flags = list(base.flags)

    queue = deque([(float(p), 0.0, 0)])
    seen = set()
    entries, stop_times = [], []
    updates = 0

    while queue:
        belief, t, depth = queue.popleft()
        key = round(belief, 12)
        if key in seen:
            continue
        seen.add(key)
        if depth > MAX_BRANCH_DEPTH:
            flags.append("depth_limit")
            continue

        hit = pm.next_hit(belief)
        if np.isnan(hit):
            stop_times.append(t)
            continue
        t_hit = t + wait_time(belief, hit, problem)
        q0, q1, weight1 = chord_support(hit, pm.envelope)
        if q0 == q1:
            stop_times.append(t_hit)
            continue
        updates += 1
        if cycle is not None and (q0, q1) == (cycle.q0, cycle.q1):
            entries.append(t_hit)
            continue
        for target, weight in ((q0, 1.0 - weight1), (q1, weight1)):
            if weight > 0:
                queue.append((target, t_hit, depth + 1))

    if entries:
        if stop_times:
            flags.append("some_branches_stop")
        return LongRunReport(CYCLE, cycle, min(entries), base.trap_interval, tuple(flags))
    if updates == 0:
        return LongRunReport(NEVER_LEARNS, None, math.nan, base.trap_interval, tuple(flags))
    return LongRunReport(LEARNING_STOPS, None, max(stop_times), base.trap_interval, tuple(flags))


def entry_time(trace: Trace, cycle: BeliefCycle, atol: float = 1e-9) -> float:
    """First time a jump of the trace lands on a target of the cycle; NaN if it never does."""
    for event in trace.jumps:
        if min(abs(event.after - cycle.q0), abs(event.after - cycle.q1)) <= atol:
            return event.time
    return math.nan
