"""
infocycles: optimal dynamic information acquisition about a two-state changing world.

Sub-packages mirror the pipeline: `model` (primitives) -> `envelope`
(concavification) -> `solver` (Bellman iteration) -> `policy` (experiment
intervals and information region) -> `dynamics` (simulation, long-run
classification) -> `stationary` (cycle payoffs and search) -> `limit`
(vanishing fixed cost) with `portfolio` as an application and `cli` as the
batch front-end.
"""

__version__ = "0.4.0"
