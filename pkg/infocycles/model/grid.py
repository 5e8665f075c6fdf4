"""
Belief grids and sampled functions on them.

A GridFunction stores one real sample per belief node and interpolates
linearly in between. Every value function, cost potential and flow payoff
in the toolkit travels as a GridFunction.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Tuple, Union

import numpy as np
import pandas as pd

from infocycles.model.errors import ModelError

DEFAULT_GRID_SIZE = 1001
DEFAULT_CLIP = 1e-6

# nodes closer than this to pi are snapped onto it instead of duplicated
_SNAP_TOL = 1e-9

ArrayLike = Union[float, np.ndarray]


def make_grid(n: int = DEFAULT_GRID_SIZE, pi: float = 0.5, clip: float = 0.0) -> np.ndarray:
    """
    Build a uniform belief grid on [clip, 1 - clip] that contains pi as a node.

    Args:
        n: Number of uniform nodes (before pi is inserted)
        pi: Invariant probability, always present as an exact node
        clip: Endpoint clamp, used when the cost potential diverges at 0 and 1

    Returns:
        Strictly increasing numpy array of beliefs
    """
    if n < 2:
        raise ModelError(f"grid needs at least 2 nodes, got {n}")
    if not 0.0 <= clip < pi < 1.0 - clip:
        raise ModelError(f"pi={pi} must lie strictly inside [{clip}, {1.0 - clip}]")

    grid = np.linspace(clip, 1.0 - clip, n)
    nearest = int(np.argmin(np.abs(grid - pi)))
    if abs(grid[nearest] - pi) <= _SNAP_TOL:
        grid[nearest] = pi
    else:
        grid = np.insert(grid, np.searchsorted(grid, pi), pi)
    return grid


def check_convexity(values: np.ndarray, grid: np.ndarray, tol: float = 1e-9) -> Tuple[bool, str]:
    """
    Check that sampled values are convex on the grid (slopes non-decreasing).

    Returns:
        Tuple of (is_convex, message)
    """
    values = np.asarray(values, dtype=float)
    finite = np.isfinite(values)
    x, y = np.asarray(grid, dtype=float)[finite], values[finite]
    if x.size < 3:
        return True, "OK"

    slopes = np.diff(y) / np.diff(x)
    scale = max(1.0, float(np.max(np.abs(slopes))))
    drops = np.diff(slopes)
    worst = int(np.argmin(drops))
    if drops[worst] < -tol * scale:
        return False, f"slope decreases by {-drops[worst]:.3g} at belief {x[worst + 1]:.6g}"
    return True, "OK"


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real samples on a strictly increasing belief grid, linear in between."""
    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.array(self.grid, dtype=float)
        values = np.array(self.values, dtype=float)
        if grid.ndim != 1 or grid.shape != values.shape:
            raise ModelError(f"grid and values shapes differ: {grid.shape} vs {values.shape}")
        if grid.size < 2 or np.any(np.diff(grid) <= 0):
            raise ModelError("grid must hold at least 2 strictly increasing nodes")
        grid.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def __call__(self, p: ArrayLike) -> ArrayLike:
        out = np.interp(p, self.grid, self.values)
        return float(out) if np.ndim(out) == 0 else out

    def __len__(self) -> int:
        return self.grid.size

    # ── arithmetic on a shared grid ──────────────────────────────────────────

    def _other(self, other) -> np.ndarray:
        if isinstance(other, GridFunction):
            if other.grid.shape != self.grid.shape or not np.array_equal(other.grid, self.grid):
                raise ModelError("GridFunctions live on different grids")
            return other.values
        return np.asarray(other, dtype=float)

    def __add__(self, other) -> "GridFunction":
        return self.with_values(self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other) -> "GridFunction":
        return self.with_values(self.values - self._other(other))

    def __rsub__(self, other) -> "GridFunction":
        return self.with_values(self._other(other) - self.values)

    def __mul__(self, k: float) -> "GridFunction":
        return self.with_values(self.values * k)

    __rmul__ = __mul__

    def __neg__(self) -> "GridFunction":
        return self.with_values(-self.values)

    def with_values(self, values: np.ndarray) -> "GridFunction":
        return GridFunction(self.grid, values)

    def maximum(self, other) -> "GridFunction":
        return self.with_values(np.maximum(self.values, self._other(other)))

    def minimum(self, other) -> "GridFunction":
        return self.with_values(np.minimum(self.values, self._other(other)))

    def sup(self) -> float:
        return float(np.max(self.values))

    def inf(self) -> float:
        return float(np.min(self.values))

    def node_index(self, p: float, atol: float = 1e-12) -> int:
        """Index of the node equal to p, or -1 when p is not a node."""
        i = int(np.searchsorted(self.grid, p))
        for j in (i - 1, i):
            if 0 <= j < self.grid.size and abs(self.grid[j] - p) <= atol:
                return j
        return -1

    # ── persistence ──────────────────────────────────────────────────────────

    def to_frame(self, name: str = "value") -> pd.DataFrame:
        return pd.DataFrame({"belief": self.grid, name: self.values})

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        self.to_frame().to_csv(path, index=False, float_format="%.12g")
        return path

    @classmethod
    def from_csv(cls, path: Union[str, Path], column: str = "value") -> "GridFunction":
        df = pd.read_csv(path, comment="#")
        return cls(df["belief"].to_numpy(), df[column].to_numpy())
