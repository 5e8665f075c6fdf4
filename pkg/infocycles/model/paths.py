"""
Exact discounted integrals of piecewise-linear grid functions along drift paths.

Beliefs drift deterministically toward pi, so the path started at a node
crosses every node between it and pi. Along one grid segment the distance
to pi decays like D e^{-lam t} and a piecewise-linear g is affine in that
distance, which integrates in closed form. Chaining segments outward from
pi gives I(p) = int_0^inf e^{-rt} g(p_t) dt at every node in one pass.
"""

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from infocycles.model.errors import ModelError


@dataclass(frozen=True, eq=False)
class PathIntegrator:
    grid: np.ndarray
    pi: float
    lam: float
    r: float
    _pi_index: int = field(init=False, repr=False)

    def __post_init__(self):
        idx = int(np.searchsorted(self.grid, self.pi))
        if idx >= self.grid.size or self.grid[idx] != self.pi:
            raise ModelError("pi must be a grid node")
        object.__setattr__(self, "_pi_index", idx)

    @property
    def a(self) -> float:
        return self.r / self.lam

    def _sides(self) -> Tuple[np.ndarray, np.ndarray]:
        """Node indices ordered outward from pi: (right side, left side)."""
        k = self._pi_index
        return np.arange(k, self.grid.size), np.arange(k, -1, -1)

    def _segment(self, dist_in, dist_out, g_in, g_out, d):
        """Discounted integral of g from distance d down to dist_in, plus the decay factor."""
        width = dist_out - dist_in
        slope = np.divide(g_out - g_in, width, out=np.zeros_like(width), where=width > 0)
        intercept = g_in - slope * dist_in
        rho = np.divide(dist_in, d, out=np.zeros_like(d), where=d > 0)
        decay = rho ** self.a
        flow = (intercept * (1.0 - decay) / self.r
                + slope * d * (1.0 - decay * rho) / (self.r + self.lam))
        return flow, decay

    def node_integrals(self, values: np.ndarray) -> np.ndarray:
        """I(p) at every grid node for g sampled as `values`."""
        values = np.asarray(values, dtype=float)
        out = np.empty_like(values)
        out[self._pi_index] = values[self._pi_index] / self.r

        for side in self._sides():
            dist = np.abs(self.grid[side] - self.pi)
            g = values[side]
            flow, decay = self._segment(dist[:-1], dist[1:], g[:-1], g[1:], dist[1:])
            acc = out[self._pi_index]
            for j in range(1, side.size):
                acc = flow[j - 1] + decay[j - 1] * acc
                out[side[j]] = acc
        return out

    def integral(self, values: np.ndarray, p, nodes: Optional[np.ndarray] = None) -> np.ndarray:
        """
        I(p) at arbitrary beliefs p (scalar or array).

        Beliefs outside the grid see g extended as a constant, matching
        np.interp. `nodes` may carry precomputed node_integrals(values).
        """
        values = np.asarray(values, dtype=float)
        if nodes is None:
            nodes = self.node_integrals(values)
        p = np.asarray(p, dtype=float)
        flat = np.atleast_1d(p).ravel()
        out = np.empty_like(flat)

        right = flat >= self.pi
        for mask, side in zip((right, ~right), self._sides()):
            if not np.any(mask):
                continue
            dist = np.abs(self.grid[side] - self.pi)
            g = values[side]
            d = np.abs(flat[mask] - self.pi)
            # segment j spans (dist[j-1], dist[j]]; past the last node the slope is zero
            j = np.clip(np.searchsorted(dist, d, side="left"), 1, dist.size)
            beyond = j == dist.size
            j_in = j - 1
            j_out = np.minimum(j, dist.size - 1)
            dist_out = np.where(beyond, d, dist[j_out])
            g_out = np.where(beyond, g[-1], g[j_out])
            flow, decay = self._segment(dist[j_in], dist_out, g[j_in], g_out, d)
            out[mask] = flow + decay * nodes[side[j_in]]

        out = out.reshape(p.shape)
        return float(out) if out.ndim == 0 else out

    def flow(self, values: np.ndarray, p, q) -> np.ndarray:
        """Discounted integral of g along the drift from p until it reaches q."""
        ip = self.integral(values, p)
        iq = self.integral(values, q)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.abs(np.asarray(q, dtype=float) - self.pi) / np.abs(np.asarray(p, dtype=float) - self.pi)
        discount = np.where(np.asarray(p) == self.pi, 1.0, ratio ** self.a)
        out = ip - discount * iq
        return float(out) if np.ndim(out) == 0 else out
