from .extract import PolicyMap, extract_policy, optimal_experiment, optimal_wait_time, residual_value

__all__ = [
    'PolicyMap',
    'residual_value',
    'extract_policy',
    'optimal_wait_time',
    'optimal_experiment',
]
