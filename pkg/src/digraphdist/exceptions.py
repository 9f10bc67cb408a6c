"""Exception hierarchy shared across the package."""


class DigraphDistError(Exception):
    """Base class for every error raised by digraphdist."""


class GraphError(DigraphDistError, ValueError):
    pass


class SelfLoopError(GraphError):
    def __init__(self, vertex):
        super().__init__(f"self-loop at vertex {vertex}")
        self.vertex = vertex


class VertexOutOfRangeError(GraphError, IndexError):
    def __init__(self, vertex, n):
        super().__init__(f"vertex {vertex} out of range for graph on {n} vertices")
        self.vertex = vertex
        self.n = n


class EmptyGraphError(GraphError):
    pass


class BadParamError(DigraphDistError, ValueError):
    pass


class BadConfigError(DigraphDistError, ValueError):
    pass


class OrbitOutOfRangeError(DigraphDistError, IndexError):
    pass


class NotNormalizedError(DigraphDistError, ValueError):
    pass


class DomainMismatchError(DigraphDistError, ValueError):
    pass


class MissingGraphError(DigraphDistError, KeyError):
    pass


class MetricUnavailableError(DigraphDistError, ValueError):
    pass


class ModelMismatchError(MetricUnavailableError):
    pass


class NegativeDcovError(DigraphDistError, ArithmeticError):
    pass


class BadKError(DigraphDistError, ValueError):
    pass


class BadClusteringError(DigraphDistError, ValueError):
    pass


class EmptyRangeError(DigraphDistError, ValueError):
    pass


class SizeMismatchError(DigraphDistError, ValueError):
    pass


class BadAlphaError(DigraphDistError, ValueError):
    pass
