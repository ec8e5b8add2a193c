"""Exception hierarchy shared across the package."""


class TrackGameError(Exception):
    """Base class for all package-specific errors."""


class ScenarioError(TrackGameError):
    """A scenario file failed to parse or violated an invariant.

    ``field`` carries a dotted path to the offending entry, e.g.
    ``"selector.alpha"``.
    """

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class DegenerateGeometryError(TrackGameError):
    """Target co-located with a radar; range-bearing model undefined."""


class CovarianceDegeneracyError(TrackGameError):
    """A covariance matrix lost symmetry or positive definiteness."""


class NumericalSingularityError(TrackGameError):
    """An innovation covariance (or similar) could not be inverted."""


class InstanceTooLargeError(TrackGameError):
    """Joint strategy space exceeds the configured enumeration cap."""

    def __init__(self, size: int, cap: int):
        self.size = size
        self.cap = cap
        super().__init__(f"joint strategy space has {size} profiles, cap is {cap}")


class InfeasibleStrategySpaceError(TrackGameError):
    """Distinct-target mode requested with fewer observable targets than beams."""


class MuViolationError(TrackGameError):
    """Regret-matching normalization constant too small for the regret sum."""

    def __init__(self, mu: float, regret_sum: float):
        self.mu = mu
        self.regret_sum = regret_sum
        super().__init__(
            f"mu={mu} must exceed the positive-regret sum {regret_sum} "
            "to keep the stay-probability positive"
        )
