"""Exception hierarchy shared by all modules."""


class NewtonLkError(Exception):
    """Base class for all errors raised by newtonlk."""


class DomainError(NewtonLkError, ValueError):
    """An argument lies outside the admissible range (order k, parameters, ...)."""


class ImmersionError(NewtonLkError):
    """The chart's tangent vectors are (numerically) linearly dependent."""


class OffManifoldError(NewtonLkError):
    """A chart point does not lie on the space form within tolerance."""


class MetricSignatureError(NewtonLkError):
    """The induced metric is not positive definite."""


class SchemaError(NewtonLkError, ValueError):
    """Malformed external data (CSV sample files, config documents)."""
