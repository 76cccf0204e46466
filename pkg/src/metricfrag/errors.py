"""Exception hierarchy shared by all metricfrag modules."""


class MetricFragError(Exception):
    """Base class for every error raised by this package."""


class NotSymmetric(MetricFragError):
    """Distance matrix has an entry where dist[i][j] != dist[j][i]."""


class NonzeroDiagonal(MetricFragError):
    """Distance matrix has a nonzero diagonal entry."""


class ZeroOffDiagonal(MetricFragError):
    """Two distinct points are at distance zero (not a metric)."""


class TriangleViolation(MetricFragError):
    """Triangle inequality fails; carries the offending triple (i, j, k)."""

    def __init__(self, i: int, j: int, k: int, message: str = ""):
        self.triple = (i, j, k)
        super().__init__(message or f"triangle inequality violated on ({i},{j},{k})")


class SinglePoint(MetricFragError):
    """Operation undefined on a one-point space."""


class DomainError(MetricFragError, ValueError):
    """Argument outside the mathematically valid range."""


class ParameterMismatch(MetricFragError):
    """The exponent value does not solve the defining equation for this distortion."""


class NonTerminating(MetricFragError):
    """Radii schedule does not decay; truncation index would exceed the cap."""


class SampleCap(MetricFragError):
    """Fragmentation sampling did not assign every point within the cap (defensive)."""


class NotNormalized(MetricFragError):
    """Space diameter exceeds 2; normalize() it first."""


class TooLarge(MetricFragError):
    """Instance too big for the exhaustive oracle search."""


class Disconnected(MetricFragError):
    """Random graph generator failed to produce a connected graph."""


class BadSpec(MetricFragError):
    """Malformed generator specification."""


class ParseError(MetricFragError):
    """Distance-matrix text is malformed; carries line/column location."""

    def __init__(self, message: str, line: int, column: int | None = None):
        self.line = line
        self.column = column
        where = f"line {line}" + (f", column {column}" if column is not None else "")
        super().__init__(f"{message} ({where})")
