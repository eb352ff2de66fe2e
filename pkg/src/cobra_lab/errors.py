"""Exception hierarchy shared by every module."""


class CobraLabError(Exception):
    """Base class for all library errors."""


class InvalidParams(CobraLabError, ValueError):
    pass


class GenerationFailed(CobraLabError):
    pass


class DisconnectedGraph(InvalidParams):
    pass


class TooLarge(CobraLabError):
    pass


class NoConvergence(CobraLabError):
    pass


class RegularityRequired(InvalidParams):
    pass


class SupportMismatch(InvalidParams):
    pass


class DegenerateSigma(CobraLabError):
    """A vertex has zero best path product to the target set."""


class BiasViolation(CobraLabError):
    """The Metropolis-derived chain is not a valid inverse-degree-biased walk."""


class Unreachable(CobraLabError):
    pass


class Reducible(CobraLabError):
    pass


class Singular(CobraLabError):
    pass


class InsufficientPoints(InvalidParams):
    pass


class AllTimedOut(CobraLabError):
    pass


class ConfigError(CobraLabError):
    pass


class UnknownExperiment(ConfigError):
    pass
