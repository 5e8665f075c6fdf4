"""
Acceptance Checks: infocycles
==============================
Approach: numeric golden set with per-case tolerances

Every case in golden_set.json names a check function, its parameters, the
expected value and an absolute tolerance. A check returns one number (a
bool counts as 0/1), so a case passes when |measured - expected| <= tol.

Groups:

  identities : drift and waiting-time identities, confirmation rates
  envelope   : concave envelope geometry on small exact functions
  portfolio  : indirect utility, risky share and fee plateau
  solver     : bracketed value iteration on the entropy benchmark
  stationary : cycle payoffs, comparisons and the lambda sweep
  dynamics   : cycle waiting times, occupation law, martingale check
  limit      : kappa = 0 closed form and confirmation holds

Usage:
  cd /path/to/infocycles
  python eval/acceptance.py                     # run all cases
  python eval/acceptance.py --group solver      # run one group only
  python eval/acceptance.py --id DYN-02         # run one case
"""

import argparse
import datetime
import json
import os
import sys
from functools import lru_cache
from pathlib import Path
from typing import Callable, Dict

import numpy as np
from scipy import stats
from tabulate import tabulate

# ── path setup ──────────────────────────────────────────────────────────────
ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(ROOT))

# Load .env if present
try:
    from dotenv import load_dotenv
    load_dotenv(ROOT / ".env")
except ImportError:
    pass

from infocycles.dynamics import (
    BeliefCycle,
    ensemble_beliefs,
    martingale_table,
    stationary_density,
)
from infocycles.envelope import concave_envelope
from infocycles.limit import (
    build_woc,
    confirmation_rate,
    holding_times,
    longrun_interval,
    simulate_woc,
    w0_closed_form,
)
from infocycles.model import CostSpec, GridFunction, Problem, drift, wait_time
from infocycles.policy import extract_policy
from infocycles.portfolio import MarketSpec, indirect_utility, portfolio_frame
from infocycles.solver import solve
from infocycles.stationary import compare_cycles, cycle_payoffs, optimize_cycle, sweep_lambda

GROUPS = ("identities", "envelope", "portfolio", "solver", "stationary", "dynamics", "limit")

# ── problems shared by the checks ───────────────────────────────────────────

TWO_ACTIONS = [(1.0, -1.0), (-1.0, 1.0)]
# policy with E* = (0.053, 0.947) and I* = [0.183, 0.817] on a hand-picked grid
SYNTHETIC_GRID = np.array([0.0, 0.053, 0.1, 0.183, 0.3, 0.5, 0.7, 0.817, 0.9, 0.947, 1.0])
SYNTHETIC_W = np.array([-1.0, 0.0, -0.005, -0.01, -0.01, -0.01, -0.01, -0.01, -0.005, 0.0, -1.0])


@lru_cache(maxsize=None)
def benchmark_problem(grid_size: int = 401) -> Problem:
    return Problem.from_actions(TWO_ACTIONS, CostSpec(kind="entropy", scale=0.1),
                                lam=0.5, pi=0.5, r=1.0, kappa=0.01, grid_size=grid_size)


@lru_cache(maxsize=None)
def benchmark_solution(grid_size: int = 401):
    problem = benchmark_problem(grid_size)
    result = solve(problem, tol=1e-7)
    return result, extract_policy(result.w, problem, result.bracket.gap)


@lru_cache(maxsize=None)
def valley_problem() -> Problem:
    return Problem.from_table([0.0, 0.5, 1.0], [1.0, 0.0, 1.0], CostSpec(kind="zero"),
                              lam=0.5, pi=0.5, r=1.0, grid_size=3)


@lru_cache(maxsize=None)
def synthetic_policy():
    problem = Problem.from_actions(TWO_ACTIONS, CostSpec(kind="neg-variance", scale=0.5),
                                   lam=0.5, pi=0.5, r=1.0, kappa=0.01, grid=SYNTHETIC_GRID)
    return problem, extract_policy(GridFunction(SYNTHETIC_GRID, SYNTHETIC_W), problem)


def _cycle(q0, p0, p1, q1, problem=None) -> BeliefCycle:
    return BeliefCycle.from_thresholds(q0, p0, p1, q1, problem or benchmark_problem())


# ── check registry ──────────────────────────────────────────────────────────

CHECKS: Dict[str, Callable[..., float]] = {}


def check(name: str):
    """Register a check function under `name`."""
    def decorator(fn):
        CHECKS[name] = fn
        return fn
    return decorator


@check("wait_time")
def _wait_time(q: float, p: float) -> float:
    return wait_time(q, p, benchmark_problem())


@check("drift_roundtrip")
def _drift_roundtrip(q: float, p: float) -> float:
    problem = benchmark_problem()
    return abs(drift(q, wait_time(q, p, problem), problem) - p)


@check("rate_sum")
def _rate_sum(q0: float, q1: float) -> float:
    problem = benchmark_problem()
    return confirmation_rate(q0, q1, problem) + confirmation_rate(q1, q0, problem)


@check("envelope_intervals")
def _envelope_intervals(x: list, y: list) -> float:
    return float(len(concave_envelope(GridFunction(x, y)).intervals))


@check("envelope_value")
def _envelope_value(x: list, y: list, at: float) -> float:
    return float(concave_envelope(GridFunction(x, y)).cav(at))


@check("portfolio_u")
def _portfolio_u(p: float, **market) -> float:
    return indirect_utility(MarketSpec.benchmark(**market), p).u


@check("portfolio_alpha")
def _portfolio_alpha(p: float, **market) -> float:
    return indirect_utility(MarketSpec.benchmark(**market), p).alpha


@check("fee_plateau_edge")
def _fee_plateau_edge(side: str, z: float, n: int = 3001) -> float:
    beliefs = np.linspace(0.0, 1.0, n)
    frame = portfolio_frame(MarketSpec.benchmark(z=z), beliefs)
    safe = beliefs[frame["gamma"].to_numpy() == 0.0]
    return float(safe.min() if side == "low" else safe.max())


@check("solver_converged")
def _solver_converged() -> float:
    result, _ = benchmark_solution()
    return float(result.bracket.converged)


@check("solver_symmetry")
def _solver_symmetry() -> float:
    result, _ = benchmark_solution()
    w = result.w.values
    return float(np.max(np.abs(w - w[::-1])))


@check("solver_residual_sup")
def _solver_residual_sup() -> float:
    _, pm = benchmark_solution()
    return pm.residual.sup()


@check("grid_cycle_excess")
def _grid_cycle_excess() -> float:
    """|best node cycle value - w(pi)| in excess of 2 (gap + 1e-6); zero or less passes."""
    result, _ = benchmark_solution()
    best = optimize_cycle(benchmark_problem(), on_grid=True)
    return abs(best.value - float(result.w(0.5))) - 2.0 * (result.bracket.gap + 1e-6)


@check("routes_agree")
def _routes_agree(q0: float, p0: float, p1: float, q1: float) -> float:
    return float(cycle_payoffs(_cycle(q0, p0, p1, q1), benchmark_problem()).routes_agree)


@check("cycles_comparable")
def _cycles_comparable(a: list, b: list) -> float:
    """Number of the three partial orders under which the two cycles are comparable."""
    verdict = compare_cycles(_cycle(*a), _cycle(*b))
    return float(sum(v != "incomparable" for v in verdict.values()))


@check("sweep_learning")
def _sweep_learning(lam: float, n_grid: int = 15) -> float:
    table = sweep_lambda(benchmark_problem(), [lam], n_grid=n_grid)
    return float(table["learning"].iloc[0])


@check("cycle_wait")
def _cycle_wait(side: int) -> float:
    problem, _ = synthetic_policy()
    c = _cycle(0.053, 0.183, 0.817, 0.947, problem)
    return c.tau1 if side else c.tau0


@check("occupation_mass")
def _occupation_mass(q0: float, p0: float, p1: float, q1: float) -> float:
    problem, _ = synthetic_policy()
    return stationary_density(_cycle(q0, p0, p1, q1, problem), problem).mass0


@check("martingale_max_z")
def _martingale_max_z(p0: float, n_paths: int = 20000, seed: int = 0) -> float:
    problem, pm = synthetic_policy()
    times = np.linspace(0.0, 10.0, 11)
    samples = ensemble_beliefs(pm, p0, times, n_paths, seed=seed)
    return float(martingale_table(samples, times, problem)["z"].abs().max())


@check("valley_w0")
def _valley_w0(p: float) -> float:
    return float(w0_closed_form(p, valley_problem()))


@check("longrun_width")
def _longrun_width() -> float:
    q0, q1 = longrun_interval(benchmark_problem())
    return q1 - q0


@check("hold_ks_pvalue")
def _hold_ks_pvalue(horizon: float = 40000.0, seed: int = 0) -> float:
    problem = valley_problem()
    policy = build_woc(problem, short_run=False)
    rho = policy.rates[0]
    trace = simulate_woc(policy, problem.pi, horizon, seed=seed)
    return float(stats.kstest(holding_times(trace, 0.0), "expon", args=(0.0, 1.0 / rho)).pvalue)


# ── main evaluation loop ─────────────────────────────────────────────────────

def run_evaluation(golden_path: str = None, group_filter: str = None, id_filter: str = None,
                   progress_callback=None) -> list:
    if golden_path is None:
        golden_path = str(Path(__file__).parent / "golden_set.json")

    with open(golden_path) as f:
        test_cases = json.load(f)

    if group_filter:
        test_cases = [t for t in test_cases if t.get("group") == group_filter]
    if id_filter:
        test_cases = [t for t in test_cases if t.get("id") == id_filter]

    results = []

    print(f"\n{'='*65}")
    print(f"  infocycles acceptance  |  {len(test_cases)} cases")
    print(f"{'='*65}\n")

    for i, case in enumerate(test_cases, start=1):
        test_id = case["id"]
        group = case.get("group", "identities")
        expected = float(case["expected"])
        tol = float(case.get("tol", 1e-9))
        params = case.get("params", {})

        print(f"[{i}/{len(test_cases)}] {test_id} [{group}] {case.get('description', '')}")

        error = None
        try:
            measured = float(CHECKS[case["check"]](**params))
        except Exception as e:
            measured = float("nan")
            error = f"{type(e).__name__}: {e}"
            print(f"  ERROR   : {error}")

        if case.get("compare", "abs") == "max":
            passed = measured <= expected + tol
        elif case.get("compare") == "min":
            passed = measured >= expected - tol
        else:
            passed = abs(measured - expected) <= tol
        print(f"  Measured: {measured:.10g}  expected {expected:.10g} +/- {tol:.3g}  ->  {'PASS' if passed else 'FAIL'}")
        print()

        results.append({
            "id": test_id,
            "group": group,
            "check": case["check"],
            "params": params,
            "expected": expected,
            "tol": tol,
            "measured": measured,
            "passed": bool(passed),
            "error": error,
        })

        if progress_callback is not None:
            progress_callback(i, len(test_cases))

    return results


def print_summary(results: list):
    """Print pass counts per group."""
    groups = {}
    for r in results:
        groups.setdefault(r["group"], []).append(r["passed"])

    rows = [(g, len(p), sum(p), len(p) - sum(p)) for g, p in sorted(groups.items(), key=lambda kv: GROUPS.index(kv[0])
                                                                 if kv[0] in GROUPS else len(GROUPS))]
    passed = [r["passed"] for r in results]
    rows.append(("OVERALL", len(passed), sum(passed), len(passed) - sum(passed)))

    print(f"\n{'='*65}")
    print("  SUMMARY")
    print(f"{'='*65}")
    print(tabulate(rows, headers=["group", "N", "pass", "fail"]))
    print(f"{'='*65}\n")


def save_results(results: list, output_dir: str = None):
    if output_dir is None:
        output_dir = str(Path(__file__).parent)
    ts = datetime.datetime.now().strftime("%Y%m%d_%H%M%S")
    path = os.path.join(output_dir, f"results_{ts}.json")
    with open(path, "w") as f:
        json.dump(results, f, indent=2, default=str)
    print(f"Results saved to: {path}")
    return path


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description="Run the infocycles acceptance checks.")
    parser.add_argument(
        "--group", default=None, choices=GROUPS,
        help="Only run cases in this group."
    )
    parser.add_argument(
        "--id", default=None,
        help="Only run the case with this id (e.g. SOL-01)."
    )
    parser.add_argument(
        "--golden", default=None,
        help="Path to golden_set.json (defaults to eval/golden_set.json)."
    )
    args = parser.parse_args()

    results = run_evaluation(
        golden_path=args.golden,
        group_filter=args.group,
        id_filter=args.id,
    )
    print_summary(results)
    save_results(results)
    sys.exit(0 if all(r["passed"] for r in results) else 1)
