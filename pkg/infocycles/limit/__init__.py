from .convergence import CONVERGENCE_COLUMNS, convergence_study
from .woc import (
    ConfirmationPoint,
    WaitOrConfirmPolicy,
    build_woc,
    confirmation_rate,
    holding_times,
    longrun_interval,
    simulate_woc,
    simulate_woc_payoff,
    w0_closed_form,
    woc_ensemble_beliefs,
    woc_step,
)

__all__ = [
    'CONVERGENCE_COLUMNS',
    'ConfirmationPoint',
    'WaitOrConfirmPolicy',
    'build_woc',
    'confirmation_rate',
    'convergence_study',
    'holding_times',
    'longrun_interval',
    'simulate_woc',
    'simulate_woc_payoff',
    'w0_closed_form',
    'woc_ensemble_beliefs',
    'woc_step',
]
