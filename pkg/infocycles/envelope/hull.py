"""
Concave envelopes of grid functions.

The envelope of sampled points is their upper convex hull, built with a
monotone stack in one left-to-right pass. Wherever the envelope lies
strictly above the function we get an "experiment interval": beliefs
inside it are best split into the two contact points at its ends.
"""

from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np
import pandas as pd

from infocycles.model.grid import GridFunction

CONTACT_RTOL = 1e-9


def _cross(o, a, b) -> float:
    """2D cross product of OA and OB; positive for a counter-clockwise turn."""
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def upper_hull(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Indices of the upper convex hull vertices of points sorted by x."""
    stack = []
    for i in range(x.size):
        point = (x[i], y[i])
        while len(stack) >= 2 and _cross((x[stack[-2]], y[stack[-2]]), (x[stack[-1]], y[stack[-1]]), point) >= 0:
            stack.pop()
        stack.append(i)
    return np.asarray(stack, dtype=int)


class ChordSupport(NamedTuple):
    q0: float
    q1: float
    weight1: float

    @property
    def degenerate(self) -> bool:
        return self.q0 == self.q1


@dataclass(frozen=True, eq=False)
class EnvelopeResult:
    """Concave envelope of `function` with its experiment intervals."""
    function: GridFunction
    cav: GridFunction
    contact: np.ndarray
    interval_nodes: Tuple[Tuple[int, int], ...]
    tolerance: float

    @property
    def intervals(self) -> Tuple[Tuple[float, float], ...]:
        grid = self.cav.grid
        return tuple((float(grid[i]), float(grid[j])) for i, j in self.interval_nodes)

    @property
    def gap(self) -> GridFunction:
        """Cav[g] - g, zero at contact nodes."""
        return self.cav - self.function

    def interval_index(self, p: float) -> Optional[int]:
        """Index of the open interval containing p, or None."""
        for k, (a, b) in enumerate(self.intervals):
            if a < p < b:
                return k
        return None

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "belief": self.cav.grid,
            "g": self.function.values,
            "cav": self.cav.values,
            "in_interval": (~self.contact).astype(int),
        })


def concave_envelope(g: GridFunction) -> EnvelopeResult:
    """
    Smallest concave piecewise-linear majorant of the sampled points.

    Nodes with |cav - g| <= 1e-9 * (max g - min g) count as contact and
    carry cav = g exactly; maximal runs of the remaining nodes form the
    experiment intervals, bounded by the contact nodes on either side.
    """
    x, y = g.grid, g.values
    hull = upper_hull(x, y)
    cav = np.interp(x, x[hull], y[hull])

    tol = CONTACT_RTOL * (float(np.max(y)) - float(np.min(y)))
    contact = np.abs(cav - y) <= tol
    contact[hull] = True
    cav = np.where(contact, y, np.maximum(cav, y))

    return EnvelopeResult(
        function=g,
        cav=g.with_values(cav),
        contact=contact,
        interval_nodes=_runs_between_contacts(contact),
        tolerance=tol,
    )


def _runs_between_contacts(contact: np.ndarray) -> Tuple[Tuple[int, int], ...]:
    """(left contact, right contact) node pairs around each run of non-contact nodes."""
    inside = (~contact).astype(np.int8)
    edges = np.diff(np.concatenate(([0], inside, [0])))
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1)
    return tuple((int(s - 1), int(e)) for s, e in zip(starts, ends))


def chord_support(p: float, env: EnvelopeResult) -> ChordSupport:
    """
    Bayes-plausible split of p onto the ends of its experiment interval.

    Outside every interval (contact points included) the support is
    degenerate at p, i.e. the uninformative experiment.
    """
    k = env.interval_index(p)
    if k is None:
        return ChordSupport(float(p), float(p), 0.0)
    a, b = env.intervals[k]
    return ChordSupport(a, b, (p - a) / (b - a))
