"""
Subcommands. Each handler takes a validated RunConfig and an output
directory, writes its artifacts and returns the files it produced.
"""

import logging
from pathlib import Path

import numpy as np
import pandas as pd
from tabulate import tabulate

from infocycles.cli.artifacts import read_artifact, write_artifact, write_text
from infocycles.cli.config import RunConfig
from infocycles.cli.registry import Command, CommandOutcome, register_command
from infocycles.dynamics import (
    classify_prior,
    detect_cycle,
    ensemble_beliefs,
    martingale_table,
    occupation_cdf,
    simulate_paths,
    stationary_density,
)
from infocycles.limit import build_woc, convergence_study
from infocycles.model.errors import ConfigError, DegenerateCycleError
from infocycles.model.grid import GridFunction, make_grid
from infocycles.policy import extract_policy
from infocycles.portfolio import portfolio_frame
from infocycles.solver import solve
from infocycles.stationary import optimize_cycle, sweep_lambda

logger = logging.getLogger(__name__)

GRID_ATOL = 1e-12
MARTINGALE_CHECKPOINTS = 11


def cmd_solve(config: RunConfig, out: Path) -> CommandOutcome:
    problem = config.build_problem()
    result = solve(problem, tol=config.numerics.tol, max_iter=config.numerics.max_iter)
    bracket = result.bracket
    pm = extract_policy(result.w, problem, bracket.gap)
    report = detect_cycle(pm, problem)

    files = {
        "value.csv": write_artifact(result.to_frame(problem), out, "value.csv", "solve", config),
        "policy.csv": write_artifact(pm.to_frame(), out, "policy.csv", "solve", config),
    }
    digest = dict(problem.describe())
    digest.update(iterations=bracket.n_iter, gap=bracket.gap, tol=bracket.tol, converged=bracket.converged)
    digest.update(pm.summary())
    digest.update(report.as_row())
    summary = tabulate(sorted(digest.items()), headers=["quantity", "value"], floatfmt=".10g")
    files["summary.txt"] = write_text(summary, out, "summary.txt", "solve", config)
    return CommandOutcome(files, bracket.converged)


def _load_solved_policy(config: RunConfig, out: Path):
    """Problem and PolicyMap rebuilt from the value.csv of an earlier solve."""
    problem = config.build_problem()
    value = read_artifact(out, "value.csv")
    if len(value) != problem.grid.size or not np.allclose(value["belief"].to_numpy(), problem.grid, atol=GRID_ATOL):
        raise ConfigError("value.csv was solved on a different belief grid; rerun 'solve' with this config")
    w = GridFunction(problem.grid, value["w"].to_numpy())
    gap = float(np.max(value["v_upper"].to_numpy() - value["v_lower"].to_numpy()))
    return problem, extract_policy(w, problem, gap)


def _occupation_frame(traces, report, problem, burn_in: float) -> pd.DataFrame:
    """Time-occupation CDF on the grid, pooled over traces after burn_in, next to the cycle's exact law."""
    grid = problem.grid
    empirical = np.mean([occupation_cdf(t, grid, burn_in=burn_in) for t in traces], axis=0)
    exact = np.full(grid.size, np.nan)
    if report.cycle is not None:
        try:
            exact = stationary_density(report.cycle, problem).cdf(grid)
        except DegenerateCycleError:
            logger.info("policy cycle is degenerate: no exact occupation law")
    return pd.DataFrame({"belief": grid, "empirical_cdf": empirical, "stationary_cdf": exact})


def cmd_simulate(config: RunConfig, out: Path) -> CommandOutcome:
    problem, pm = _load_solved_policy(config, out)
    run = config.run
    p0 = config.p0
    if run.burn_in >= run.horizon:
        raise ConfigError(f"run.burn_in={run.burn_in} leaves nothing of run.horizon={run.horizon}",
                          field="run.burn_in")

    traces = simulate_paths(pm, p0, run.horizon, run.n_traces, seed=run.seed)
    trace_frame = pd.concat([t.to_frame() for t in traces], ignore_index=True)

    report = detect_cycle(pm, problem)
    rows = [dict(scope="policy", **report.as_row()),
            dict(scope="prior", **classify_prior(p0, pm, problem).as_row())]
    times = np.linspace(0.0, run.horizon, MARTINGALE_CHECKPOINTS)
    samples = ensemble_beliefs(pm, p0, times, run.n_paths, seed=run.seed)

    files = {
        "trace.csv": write_artifact(trace_frame, out, "trace.csv", "simulate", config),
        "longrun.csv": write_artifact(pd.DataFrame(rows), out, "longrun.csv", "simulate", config),
        "martingale.csv": write_artifact(martingale_table(samples, times, problem), out,
                                         "martingale.csv", "simulate", config),
        "occupation.csv": write_artifact(_occupation_frame(traces, report, problem, run.burn_in), out,
                                         "occupation.csv", "simulate", config),
    }
    return CommandOutcome(files)


def cmd_cycle(config: RunConfig, out: Path) -> CommandOutcome:
    problem = config.build_problem()
    best = optimize_cycle(problem, n_grid=config.numerics.cycle_grid)
    identity_ok, _ = best.cycle.check_identity(problem)
    row = dict(learning=best.learning, **best.cycle.as_row(), w0=best.payoffs.w0, w1=best.payoffs.w1,
               w_pi=best.payoffs.w_pi, alpha=best.payoffs.alpha, value=best.value, identity_ok=identity_ok)

    if best.learning:
        density = stationary_density(best.cycle, problem).to_frame()
    else:
        density = pd.DataFrame(columns=["belief", "density"])
    files = {
        "cycle.csv": write_artifact(pd.DataFrame([row]), out, "cycle.csv", "cycle", config),
        "density.csv": write_artifact(density, out, "density.csv", "cycle", config),
    }
    return CommandOutcome(files)


def cmd_limit(config: RunConfig, out: Path) -> CommandOutcome:
    problem = config.build_problem()
    policy = build_woc(problem, pilot_kappa=config.run.pilot_kappa)
    study = convergence_study(problem, config.run.kappas, max_workers=config.numerics.workers,
                              tol=config.numerics.tol)
    files = {
        "woc.csv": write_artifact(policy.to_frame(), out, "woc.csv", "limit", config),
        "convergence.csv": write_artifact(study, out, "convergence.csv", "limit", config),
    }
    return CommandOutcome(files)


def cmd_sweep(config: RunConfig, out: Path) -> CommandOutcome:
    problem = config.build_problem()
    table = sweep_lambda(problem, config.run.lambdas, n_grid=config.numerics.cycle_grid,
                         max_workers=config.numerics.workers)
    return CommandOutcome({"sweep.csv": write_artifact(table, out, "sweep.csv", "sweep", config)})


def cmd_portfolio(config: RunConfig, out: Path) -> CommandOutcome:
    market = config.problem.market
    if market is None:
        raise ConfigError("the portfolio command needs a problem.market section", field="problem.market")
    clip = config.numerics.clip if config.numerics.clip is not None else config.problem.cost.default_clip()
    grid = make_grid(config.numerics.grid_size, config.problem.pi, clip)
    frame = portfolio_frame(market, grid)
    return CommandOutcome({"portfolio.csv": write_artifact(frame, out, "portfolio.csv", "portfolio", config)})


register_command(Command(
    name="solve",
    description="Solve the Bellman fixed point by value bracketing and extract the optimal policy.",
    produces=("value.csv", "policy.csv", "summary.txt"),
    handler=cmd_solve,
))

register_command(Command(
    name="simulate",
    description="Simulate belief paths under the solved policy and classify the long run.",
    produces=("trace.csv", "longrun.csv", "martingale.csv", "occupation.csv"),
    handler=cmd_simulate,
    requires=("value.csv",),
))

register_command(Command(
    name="cycle",
    description="Optimize the stationary belief cycle and its long-run density.",
    produces=("cycle.csv", "density.csv"),
    handler=cmd_cycle,
))

register_command(Command(
    name="limit",
    description="Build the kappa = 0 wait-or-confirm policy and run the kappa -> 0 convergence study.",
    produces=("woc.csv", "convergence.csv"),
    handler=cmd_limit,
))

register_command(Command(
    name="sweep",
    description="Re-optimize the stationary cycle across values of lambda.",
    produces=("sweep.csv",),
    handler=cmd_sweep,
))

register_command(Command(
    name="portfolio",
    description="Tabulate the portfolio indirect utility, risky share and asset mix on the belief grid.",
    produces=("portfolio.csv",),
    handler=cmd_portfolio,
))
