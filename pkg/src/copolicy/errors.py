"""Exception hierarchy for the simulation laboratory.

Estimation failures (RankDeficient, TooFewClusters) are recoverable at the
replication level: the runner records them and keeps going. Everything else
is a caller error and propagates.
"""


class CopolicyError(Exception):
    """Base class for all package errors."""


class ParseError(CopolicyError):
    """Panel CSV could not be parsed (bad header, non-numeric cell, empty file)."""


class UnbalancedPanel(CopolicyError):
    """A unit is missing one or more years of the panel's year range."""

    def __init__(self, missing_cells):
        self.missing_cells = list(missing_cells)
        shown = ", ".join(f"{u}/{y}" for u, y in self.missing_cells[:10])
        more = "" if len(self.missing_cells) <= 10 else f" (+{len(self.missing_cells) - 10} more)"
        super().__init__(f"missing unit-year cells: {shown}{more}")


class InvalidValue(CopolicyError):
    """A panel cell violates domain validity (negative rate, nonpositive population)."""


class InvalidConfig(CopolicyError):
    """A configuration object violates its invariants."""


class KTooLarge(InvalidConfig):
    """Requested more treated units than the panel has."""


class InfeasibleWindow(InvalidConfig):
    """Panel too short to place both enactment dates with the required margins."""


class MissingExposure(CopolicyError):
    """Exposure matrix does not cover a treated unit-year."""


class EstimationError(CopolicyError):
    """Base for recoverable per-fit failures."""


class RankDeficient(EstimationError):
    """Design matrix is numerically rank deficient (rcond below threshold)."""


class TooFewClusters(EstimationError):
    """Cluster-robust covariance needs at least two clusters."""


class TooFewYears(CopolicyError):
    """Autoregressive design needs at least two panel years."""


class EmptyInput(CopolicyError):
    """Metric aggregation needs at least two replication records."""


class MixedTruths(CopolicyError):
    """Replication records passed to one summary carry different truth values."""


class AbortThreshold(CopolicyError):
    """Replication failure rate exceeded the abort threshold for a scenario."""


class MissingCells(CopolicyError):
    """Results table lacks scenario cells required by the requested figure."""

    def __init__(self, cells):
        self.cells = list(cells)
        super().__init__("results file is missing required scenario cells: " + "; ".join(self.cells))
