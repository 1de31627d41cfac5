"""Domain errors and warnings shared across the package.

Every error carries a stable ``code`` string that is emitted verbatim in
CLI and HTTP error payloads, so callers can match on the code without
parsing the human-oriented detail text.
"""


class CausalAuditError(Exception):
    """Base class for all domain errors raised by this package."""

    code = "CausalAuditError"

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class SelfLoop(CausalAuditError):
    code = "SelfLoop"


class DuplicateEdge(CausalAuditError):
    code = "DuplicateEdge"


class UnknownEndpoint(CausalAuditError):
    code = "UnknownEndpoint"


class UnknownNode(CausalAuditError):
    code = "UnknownNode"


class OverlappingSets(CausalAuditError):
    code = "OverlappingSets"


class EndpointConditioned(CausalAuditError):
    code = "EndpointConditioned"


class NotADag(CausalAuditError):
    code = "NotADag"


class UndirectedEdge(CausalAuditError):
    code = "UndirectedEdge"


class Inconsistent(CausalAuditError):
    code = "Inconsistent"


class NotExtendable(CausalAuditError):
    code = "NotExtendable"


class TooManyCandidates(CausalAuditError):
    code = "TooManyCandidates"


class FeatureIsExposureOrOutcome(CausalAuditError):
    code = "FeatureIsExposureOrOutcome"


class InsufficientRows(CausalAuditError):
    code = "InsufficientRows"


class UnknownColumn(CausalAuditError):
    code = "UnknownColumn"


class ZeroMeanTarget(CausalAuditError):
    code = "ZeroMeanTarget"


class ZeroPair(CausalAuditError):
    code = "ZeroPair"


class TooFewRows(CausalAuditError):
    code = "TooFewRows"


class MissingFeature(CausalAuditError):
    code = "MissingFeature"


class UnknownVariable(CausalAuditError):
    code = "UnknownVariable"


class GraphFormat(CausalAuditError):
    code = "GraphFormat"


class DataFormat(CausalAuditError):
    code = "DataFormat"


class ScmFormat(CausalAuditError):
    code = "ScmFormat"


class UnknownGraph(CausalAuditError):
    code = "UnknownGraph"


class MalformedBody(CausalAuditError):
    code = "MalformedBody"


class DegenerateColumnWarning(UserWarning):
    """A dataset column has zero variance; downstream scores may be degenerate."""


class SingularParentsWarning(UserWarning):
    """A parent covariance submatrix was not invertible; a ridge was applied."""


class ExtrapolationWarning(UserWarning):
    """A scenario row lies outside the per-feature range seen during fitting."""
