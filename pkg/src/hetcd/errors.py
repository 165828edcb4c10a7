"""Exception hierarchy shared by all hetcd modules."""


class HetcdError(Exception):
    """Base class for every error raised by hetcd."""


class DimensionError(HetcdError, ValueError):
    pass


class SingularDesign(HetcdError, ValueError):
    pass


class NonPositiveWeight(HetcdError, ValueError):
    pass


class EmptyInput(HetcdError, ValueError):
    pass


class MissingDriver(HetcdError, ValueError):
    pass


class ZeroVariance(HetcdError, ValueError):
    pass


class InsufficientSamples(HetcdError, ValueError):
    pass


class UnknownVariable(HetcdError, KeyError):
    pass


class InvalidDof(HetcdError, ValueError):
    pass


class InvalidQuantile(HetcdError, ValueError):
    pass


class UnknownNode(HetcdError, KeyError):
    pass


class TooManyEdges(HetcdError, ValueError):
    pass


class InvalidSpec(HetcdError, ValueError):
    pass


class NodeSetMismatch(HetcdError, ValueError):
    pass


class ConfigError(HetcdError, ValueError):
    """Invalid experiment configuration or malformed input file."""
