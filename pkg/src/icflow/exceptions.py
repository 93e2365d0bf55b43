"""Exception hierarchy for icflow."""


class IcflowError(Exception):
    """Base class for all package errors."""


class NumericalDegeneracyError(IcflowError):
    """Raised when a geometric quantity is non-finite at some grid node."""

    def __init__(self, message, node=None):
        super().__init__(message if node is None else f"{message} (node {node})")
        self.node = node


class PositivityError(IcflowError, ValueError):
    """Raised when sigma_k fails to be strictly positive where it is required."""

    def __init__(self, k, node):
        super().__init__(f"sigma_{k} <= 0 at node {node}")
        self.k = k
        self.node = node


class SingularWeightError(IcflowError, ValueError):
    """Raised when the evaluation point lies on the surface."""


class FlowBreakdown(IcflowError):
    """Raised when the flow speed becomes undefined (sigma_k <= 0).

    ``state`` is the last accepted state and ``series`` the samples
    recorded before the breakdown, when available.
    """

    def __init__(self, message, state=None, series=None, node=None):
        super().__init__(message)
        self.state = state
        self.series = series
        self.node = node
