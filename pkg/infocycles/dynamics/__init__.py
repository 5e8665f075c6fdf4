from .density import CycleOccupation, PiecewiseDensity, ergodic_density, occupation_cdf, stationary_density
from .longrun import (
    CYCLE,
    LEARNING_STOPS,
    NEVER_LEARNS,
    BeliefCycle,
    LongRunReport,
    classify_prior,
    detect_cycle,
    entry_time,
)
from .simulate import (
    Trace,
    TraceEvent,
    ensemble_beliefs,
    martingale_table,
    policy_step,
    run_ensemble,
    simulate,
    simulate_paths,
)

__all__ = [
    'Trace',
    'TraceEvent',
    'simulate',
    'simulate_paths',
    'run_ensemble',
    'policy_step',
    'ensemble_beliefs',
    'martingale_table',
    'entry_time',
    'BeliefCycle',
    'LongRunReport',
    'CYCLE',
    'LEARNING_STOPS',
    'NEVER_LEARNS',
    'detect_cycle',
    'classify_prior',
    'PiecewiseDensity',
    'CycleOccupation',
    'ergodic_density',
    'stationary_density',
    'occupation_cdf',
]
