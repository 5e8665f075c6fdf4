from .compare import compare_cycles
from .optimize import (
    CycleOptimum,
    optimize_cycle,
    params_to_cycle,
    search_cycles,
    search_grid_cycles,
    trap_margin,
    trap_test,
)
from .payoffs import (
    CyclePayoffs,
    cycle_payoffs,
    drift_segment_flow,
    flow_at,
    no_info_net_value,
    segment_flow,
    simulate_cycle_payoff,
    symmetric_cycle_value,
)
from .sweep import SWEEP_COLUMNS, sweep_lambda

__all__ = [
    'CycleOptimum',
    'CyclePayoffs',
    'SWEEP_COLUMNS',
    'compare_cycles',
    'cycle_payoffs',
    'drift_segment_flow',
    'flow_at',
    'no_info_net_value',
    'optimize_cycle',
    'params_to_cycle',
    'search_cycles',
    'search_grid_cycles',
    'segment_flow',
    'simulate_cycle_payoff',
    'symmetric_cycle_value',
    'sweep_lambda',
    'trap_margin',
    'trap_test',
]
