"""Exception hierarchy shared by every infocycles module."""


class InfoCyclesError(Exception):
    """Base class for all errors raised by the toolkit."""


class ModelError(InfoCyclesError):
    """Invalid problem primitives (rates, priors, non-convex cost potential...)."""


class DomainError(InfoCyclesError):
    """A belief or duration lies outside the domain of an operation."""


class BayesPlausibilityError(DomainError):
    """An experiment whose posterior mean differs from the prior belief."""

    def __init__(self, message: str, violation: float):
        super().__init__(message)
        self.violation = violation


class DegenerateCycleError(DomainError):
    """Operation requires a non-degenerate belief cycle."""


class NotInInfoRegionError(DomainError):
    """An optimal experiment was requested outside the information region."""


class ConfigError(InfoCyclesError):
    """Run configuration failed to parse or validate."""

    def __init__(self, message: str, field: str = None, line: int = None):
        super().__init__(message)
        self.field = field
        self.line = line


class MissingArtifactError(InfoCyclesError):
    """An upstream CSV artifact is absent; names the command producing it."""

    def __init__(self, name: str, producer: str):
        super().__init__(f"Missing artifact '{name}'. Run the '{producer}' command first.")
        self.name = name
        self.producer = producer
