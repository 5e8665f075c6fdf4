"""
Long-run belief distributions of a cycle and of simulated traces.
"""

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
import pandas as pd

from infocycles.dynamics.longrun import BeliefCycle
from infocycles.dynamics.simulate import Trace
from infocycles.model.errors import DegenerateCycleError
from infocycles.model.problem import Problem


@dataclass(frozen=True)
class PiecewiseDensity:
    """Piecewise-constant density given as (left, right, density) pieces."""
    pieces: Tuple[Tuple[float, float, float], ...]

    @property
    def masses(self) -> Tuple[float, ...]:
        return tuple((b - a) * d for a, b, d in self.pieces)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for a, b, d in self.pieces:
            out = out + np.where((x >= a) & (x <= b), d, 0.0)
        return out

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for (a, b, _), mass in zip(self.pieces, self.masses):
            out = out + mass * np.clip((x - a) / (b - a), 0.0, 1.0)
        return out

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(list(self.pieces), columns=["left", "right", "density"])


def ergodic_density(cycle: BeliefCycle) -> PiecewiseDensity:
    """Two uniform pieces of mass 1/2 on [q0, p0] and [p1, q1]."""
    if cycle.is_degenerate:
        raise DegenerateCycleError("ergodic density needs q0 < p0 < pi < p1 < q1")
    return PiecewiseDensity((
        (cycle.q0, cycle.p0, 0.5 / (cycle.p0 - cycle.q0)),
        (cycle.p1, cycle.q1, 0.5 / (cycle.q1 - cycle.p1)),
    ))


@dataclass(frozen=True)
class CycleOccupation:
    """
    Exact long-run time-occupation law of a non-degenerate cycle.

    On each side the belief spends time dp / (lam |pi - p|) in dp, so the
    density is proportional to 1/|pi - p|. Side 0 is entered with embedded
    frequency proportional to q1 - p1 and side 1 to p0 - q0; weighting by
    the waiting times gives the side masses.
    """
    cycle: BeliefCycle
    lam: float
    mass0: float
    mass1: float

    @property
    def masses(self) -> Tuple[float, float]:
        return self.mass0, self.mass1

    def pdf(self, x):
        c = self.cycle
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            side0 = self.mass0 / (self.lam * c.tau0 * np.abs(c.pi - x))
            side1 = self.mass1 / (self.lam * c.tau1 * np.abs(x - c.pi))
        return np.where((x >= c.q0) & (x <= c.p0), side0,
                        np.where((x >= c.p1) & (x <= c.q1), side1, 0.0))

    def cdf(self, x):
        c = self.cycle
        x = np.asarray(x, dtype=float)
        lo = np.clip(x, c.q0, c.p0)
        hi = np.clip(x, c.p1, c.q1)
        part0 = np.log((c.pi - c.q0) / (c.pi - lo)) / (self.lam * c.tau0)
        part1 = np.log((hi - c.pi) / (c.p1 - c.pi)) / (self.lam * c.tau1)
        return self.mass0 * part0 + self.mass1 * part1

    def to_frame(self, n: int = 201) -> pd.DataFrame:
        c = self.cycle
        x = np.concatenate((np.linspace(c.q0, c.p0, n), np.linspace(c.p1, c.q1, n)))
        return pd.DataFrame({"belief": x, "density": self.pdf(x)})


def stationary_density(cycle: BeliefCycle, problem: Problem) -> CycleOccupation:
    """Exact occupation law of the cycle under the problem's drift."""
    if cycle.is_degenerate or math.isinf(cycle.tau0) or math.isinf(cycle.tau1):
        raise DegenerateCycleError("stationary density needs a non-degenerate cycle")
    enter0 = cycle.q1 - cycle.p1
    enter1 = cycle.p0 - cycle.q0
    time0, time1 = enter0 * cycle.tau0, enter1 * cycle.tau1
    total = time0 + time1
    return CycleOccupation(cycle, problem.lam, time0 / total, time1 / total)


def occupation_cdf(trace: Trace, x, burn_in: float = 0.0):
    """
    Fraction of [burn_in, horizon] the trace spends at beliefs <= x.

    Drift pieces are integrated exactly: a monotone piece crosses x at a
    closed-form time.
    """
    start, duration, belief, holding = trace.segments(burn_in)
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    pi, lam = trace.pi, trace.lam

    B = belief[:, None]
    D = duration[:, None]
    X = x_arr[None, :]
    E = np.where(holding, belief, pi + (belief - pi) * np.exp(-lam * duration))[:, None]
    H = holding[:, None]

    with np.errstate(divide="ignore", invalid="ignore"):
        rising = np.where(X < B, 0.0, np.where(X >= E, D, np.log((pi - B) / (pi - X)) / lam))
        falling = np.where(X < E, 0.0, np.where(X >= B, D, D - np.log((B - pi) / (X - pi)) / lam))
    flat = np.where(X >= B, D, 0.0)

    below = np.where(H | (B == pi), flat, np.where(B < pi, rising, falling))
    out = below.sum(axis=0) / duration.sum()
    return float(out[0]) if np.ndim(x) == 0 else out
