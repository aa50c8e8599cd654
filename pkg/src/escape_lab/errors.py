"""Exception hierarchy shared by all modules."""


class EscapeLabError(Exception):
    """Base class for every error raised by escape_lab."""


class GraphError(EscapeLabError, ValueError):
    pass


class DuplicateEdge(GraphError):
    pass


class NonPositiveWeight(GraphError):
    pass


class NonPositiveMeasure(GraphError):
    pass


class Disconnected(GraphError):
    pass


class SelfLoop(GraphError):
    pass


class UnknownVertex(EscapeLabError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class MissingEdgeWeight(GraphError):
    pass


class MissingValue(EscapeLabError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class TruncationTooSmall(EscapeLabError):
    """A request needs geometry beyond what the materialized truncation certifies."""


class AssumptionViolated(EscapeLabError, ValueError):
    pass


class Overflow(EscapeLabError):
    pass


class UnclassifiedRegime(EscapeLabError, ValueError):
    pass


class PlanIncomplete(EscapeLabError, ValueError):
    pass


class PlanTooSmall(EscapeLabError, ValueError):
    pass


class DomainError(EscapeLabError, ValueError):
    pass


class OutOfRange(EscapeLabError, ValueError):
    pass


class BeyondRecordedTime(EscapeLabError, ValueError):
    pass


class NeverVisitsSubset(EscapeLabError, ValueError):
    pass


class SingularSystem(EscapeLabError):
    pass


class HypothesisViolated(EscapeLabError):
    def __init__(self, message, failures=None):
        super().__init__(message)
        self.failures = failures or []
