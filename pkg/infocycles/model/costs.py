"""
Cost-potential library for uniformly posterior separable information costs.

An experiment moving the belief from p to a posterior distribution F costs
E_F[c(q)] - c(p), where c is a convex "certainty" potential.
"""

from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.special import logit, xlogy

from infocycles.model.grid import DEFAULT_CLIP, check_convexity

CostKind = Literal["entropy", "neg-variance", "log-likelihood-ratio", "custom-table", "zero"]

# kinds whose potential or derivative diverges at beliefs 0 and 1
DIVERGENT_KINDS = ("entropy", "log-likelihood-ratio")


class CostSpec(BaseModel):
    """
    A cost potential c on beliefs, scaled by a positive multiplier.

    entropy:              c(p) = scale * [p ln p + (1-p) ln(1-p)]
    neg-variance:         c(p) = -scale * p (1-p)
    log-likelihood-ratio: c(p) = scale * (2p-1) ln(p / (1-p))
    custom-table:         piecewise-linear through `table` rows (belief, value)
    zero:                 c = 0, no cost of information beyond the fixed cost
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: CostKind = "entropy"
    scale: float = Field(default=1.0, gt=0)
    table: Optional[List[Tuple[float, float]]] = None

    @model_validator(mode="after")
    def _check_table(self) -> "CostSpec":
        if self.kind != "custom-table":
            if self.table is not None:
                raise ValueError(f"table is only used with kind 'custom-table', not '{self.kind}'")
            return self
        if not self.table or len(self.table) < 2:
            raise ValueError("custom-table cost needs at least 2 (belief, value) rows")
        beliefs = np.array([row[0] for row in self.table], dtype=float)
        values = np.array([row[1] for row in self.table], dtype=float)
        if np.any(np.diff(beliefs) <= 0):
            raise ValueError("custom-table beliefs must be strictly increasing")
        ok, message = check_convexity(values, beliefs)
        if not ok:
            raise ValueError(f"custom-table cost is not convex: {message}")
        return self

    @property
    def diverges(self) -> bool:
        return self.kind in DIVERGENT_KINDS

    def value(self, p):
        """Evaluate c at belief(s) p."""
        p = np.asarray(p, dtype=float)
        if self.kind == "entropy":
            out = self.scale * (xlogy(p, p) + xlogy(1.0 - p, 1.0 - p))
        elif self.kind == "neg-variance":
            out = -self.scale * p * (1.0 - p)
        elif self.kind == "log-likelihood-ratio":
            with np.errstate(divide="ignore"):
                out = self.scale * (2.0 * p - 1.0) * logit(p)
        elif self.kind == "custom-table":
            beliefs, values = np.array(self.table, dtype=float).T
            out = self.scale * np.interp(p, beliefs, values)
        else:
            out = np.zeros_like(p)
        return float(out) if out.ndim == 0 else out

    def derivative(self, p, grid: Optional[np.ndarray] = None):
        """
        Evaluate c' at belief(s) p.

        Library kinds use the analytic derivative. Custom tables are
        differentiated by central differences on `grid` (or on the table
        beliefs when no grid is given).
        """
        p = np.asarray(p, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.kind == "entropy":
                out = self.scale * logit(p)
            elif self.kind == "neg-variance":
                out = self.scale * (2.0 * p - 1.0)
            elif self.kind == "log-likelihood-ratio":
                out = self.scale * (2.0 * logit(p) + (2.0 * p - 1.0) / (p * (1.0 - p)))
            elif self.kind == "custom-table":
                nodes = np.asarray(grid if grid is not None else np.array(self.table)[:, 0], dtype=float)
                slopes = np.gradient(self.value(nodes), nodes)
                out = np.interp(p, nodes, slopes)
            else:
                out = np.zeros_like(p)
        return float(out) if np.ndim(out) == 0 else out

    def default_clip(self) -> float:
        return DEFAULT_CLIP if self.diverges else 0.0
