from .costs import CostSpec
from .errors import (
    BayesPlausibilityError,
    ConfigError,
    DegenerateCycleError,
    DomainError,
    InfoCyclesError,
    MissingArtifactError,
    ModelError,
    NotInInfoRegionError,
)
from .grid import GridFunction, check_convexity, make_grid
from .paths import PathIntegrator
from .problem import (
    Experiment,
    Problem,
    discounted_path_integral,
    drift,
    experiment_cost,
    net_bounds,
    value_bounds,
    virtual_flow,
    wait_time,
    wait_times,
)

__all__ = [
    'CostSpec',
    'GridFunction',
    'make_grid',
    'check_convexity',
    'PathIntegrator',
    'Experiment',
    'Problem',
    'drift',
    'wait_time',
    'wait_times',
    'discounted_path_integral',
    'virtual_flow',
    'experiment_cost',
    'value_bounds',
    'net_bounds',
    'InfoCyclesError',
    'ModelError',
    'DomainError',
    'BayesPlausibilityError',
    'DegenerateCycleError',
    'NotInInfoRegionError',
    'ConfigError',
    'MissingArtifactError',
]
