"""
Run configuration: line-oriented `section.key = value` files validated by pydantic.

    # benchmark.cfg
    problem.actions = [[1, -1], [-1, 1]]
    problem.cost.kind = entropy
    problem.cost.scale = 0.1
    problem.lambda = 0.5
    run.seed = 7

Right-hand sides are typed with yaml.safe_load, so numbers, booleans and
(nested) lists need no quoting. `--set key=value` overrides use the same
syntax. Validation errors name the dotted key and, for file keys, the line.
"""

import hashlib
import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from infocycles.model.costs import CostSpec
from infocycles.model.errors import ConfigError
from infocycles.model.grid import DEFAULT_GRID_SIZE
from infocycles.model.problem import DEFAULT_QUAD_NODES, Problem
from infocycles.portfolio import MarketSpec, make_problem
from infocycles.solver.iterate import DEFAULT_MAX_ITER
from infocycles.stationary.optimize import DEFAULT_GRID_POINTS

DEFAULT_KAPPAS = [0.02, 0.01, 0.005, 0.002]
DEFAULT_LAMBDAS = [float(x) for x in np.round(np.logspace(np.log10(0.05), np.log10(5.0), 12), 6)]


class ProblemSection(BaseModel):
    """Primitives: exactly one of actions, utility table or market defines u."""
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    actions: Optional[List[Tuple[float, float]]] = None
    utility: Optional[List[Tuple[float, float]]] = None
    market: Optional[MarketSpec] = None
    cost: CostSpec = CostSpec()
    lam: float = Field(default=0.5, gt=0, alias="lambda")
    pi: float = Field(default=0.5, gt=0, lt=1)
    r: float = Field(default=1.0, gt=0)
    kappa: float = Field(default=0.0, ge=0)

    @model_validator(mode="after")
    def _one_utility_source(self) -> "ProblemSection":
        given = [name for name in ("actions", "utility", "market") if getattr(self, name) is not None]
        if len(given) != 1:
            raise ValueError(f"exactly one of actions, utility, market must be set, got {given or 'none'}")
        return self


class NumericsSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    grid_size: int = Field(default=DEFAULT_GRID_SIZE, ge=3)
    tol: Optional[float] = Field(default=None, gt=0)
    max_iter: int = Field(default=DEFAULT_MAX_ITER, ge=1)
    quad_nodes: int = Field(default=DEFAULT_QUAD_NODES, ge=2)
    clip: Optional[float] = Field(default=None, ge=0, lt=0.5)
    cycle_grid: int = Field(default=DEFAULT_GRID_POINTS, ge=3)
    workers: Optional[int] = Field(default=None, ge=1)


class RunSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    seed: int = Field(default=0, ge=0)
    horizon: float = Field(default=100.0, gt=0)
    n_paths: int = Field(default=1000, ge=2)
    n_traces: int = Field(default=10, ge=1)
    p0: Optional[float] = Field(default=None, ge=0, le=1)
    burn_in: float = Field(default=0.0, ge=0)
    kappas: List[float] = Field(default_factory=lambda: list(DEFAULT_KAPPAS))
    lambdas: List[float] = Field(default_factory=lambda: list(DEFAULT_LAMBDAS))
    pilot_kappa: float = Field(default=1e-3, gt=0)
    out_dir: Optional[str] = None


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    problem: ProblemSection
    numerics: NumericsSection = NumericsSection()
    run: RunSection = RunSection()

    @property
    def p0(self) -> float:
        return self.problem.pi if self.run.p0 is None else self.run.p0

    def build_problem(self) -> Problem:
        """Assemble the Problem; its own checks (convexity, pi on the grid) run here."""
        p, n = self.problem, self.numerics
        common = dict(grid_size=n.grid_size, clip=n.clip, quad_nodes=n.quad_nodes)
        if p.market is not None:
            return make_problem(p.market, p.cost, p.lam, p.pi, p.r, p.kappa, **common)
        if p.actions is not None:
            return Problem.from_actions(p.actions, p.cost, p.lam, p.pi, p.r, p.kappa, **common)
        beliefs, values = zip(*p.utility)
        return Problem.from_table(beliefs, values, p.cost, p.lam, p.pi, p.r, p.kappa, **common)

    def digest(self) -> str:
        """sha256 of the canonical JSON form; identical configs hash identically."""
        payload = json.dumps(self.model_dump(mode="json", by_alias=True), sort_keys=True)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


# ── parsing ──────────────────────────────────────────────────────────────────

def _assign(tree: Dict[str, Any], dotted: str, value: Any) -> None:
    parts = dotted.split(".")
    node = tree
    for part in parts[:-1]:
        child = node.setdefault(part, {})
        if not isinstance(child, dict):
            raise ConfigError(f"'{dotted}' nests under a key that already holds a value", field=dotted)
        node = child
    node[parts[-1]] = value


def _parse_line(text: str, line: Optional[int]) -> Tuple[str, Any]:
    if "=" not in text:
        raise ConfigError(f"expected 'key = value', got '{text}'", line=line)
    key, raw = (part.strip() for part in text.split("=", 1))
    if not key or any(not part for part in key.split(".")):
        raise ConfigError(f"invalid key '{key}'", line=line)
    try:
        value = yaml.safe_load(raw) if raw else None
    except yaml.YAMLError as e:
        raise ConfigError(f"cannot parse value of '{key}': {e}", field=key, line=line) from e
    return key, value


def parse_config_text(text: str) -> Tuple[Dict[str, Any], Dict[str, int]]:
    """Nested dict of values plus the line number of every dotted key."""
    tree: Dict[str, Any] = {}
    lines: Dict[str, int] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, value = _parse_line(stripped, number)
        _assign(tree, key, value)
        lines[key] = number
    return tree, lines


def _error_key(loc: Sequence[Any]) -> str:
    return ".".join(str(part) for part in loc if not isinstance(part, int))


def validate_config(tree: Dict[str, Any], lines: Optional[Dict[str, int]] = None) -> RunConfig:
    lines = lines or {}
    try:
        return RunConfig.model_validate(tree)
    except ValidationError as e:
        first = e.errors()[0]
        key = _error_key(first["loc"])
        # errors on a whole section point at its first key in the file
        line = lines.get(key) or next((n for k, n in sorted(lines.items(), key=lambda kv: kv[1])
                                       if key and k.startswith(key + ".")), None)
        where = f" (line {line})" if line else ""
        raise ConfigError(f"{key or 'config'}: {first['msg']}{where}", field=key or None, line=line) from e


def load_config(path: Optional[Path] = None, overrides: Sequence[str] = ()) -> RunConfig:
    """
    Read a config file (optional) and apply `key=value` overrides on top.

    Raises:
        ConfigError: unreadable file, malformed line, unknown key or invalid value
    """
    tree: Dict[str, Any] = {}
    lines: Dict[str, int] = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"cannot read config file {path}: {e}") from e
        tree, lines = parse_config_text(text)
    for override in overrides:
        key, value = _parse_line(override.strip(), None)
        _assign(tree, key, value)
        lines.pop(key, None)
    return validate_config(tree, lines)
