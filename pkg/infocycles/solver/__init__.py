from .iterate import SolveResult, ValueBracket, default_tolerance, solve
from .operators import bellman_step, check_variational_inequality, info_value_G, stopping_S

__all__ = [
    'info_value_G',
    'stopping_S',
    'bellman_step',
    'check_variational_inequality',
    'ValueBracket',
    'SolveResult',
    'default_tolerance',
    'solve',
]
