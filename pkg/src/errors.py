"""
Error hierarchy for rank dynamics analysis

Every failure raised by the library carries a category that the command
line front end maps to an exit code, plus structured context for reports.
"""

from enum import Enum
from typing import Any, Dict, Optional


class ErrorCategory(Enum):
    """Error categories used for exit code selection"""
    INPUT = "input"            # Parse / validation problems
    FIT = "fit"                # Optimizer failures
    SNAPSHOTS = "snapshots"    # Not enough snapshots for dynamics


EXIT_CODES = {
    ErrorCategory.INPUT: 2,
    ErrorCategory.FIT: 3,
    ErrorCategory.SNAPSHOTS: 4,
}


class RankAnalysisError(Exception):
    """Base class for all analysis errors"""

    category = ErrorCategory.INPUT

    def __init__(self, message: str, category: Optional[ErrorCategory] = None, **context: Any):
        super().__init__(message)
        if category is not None:
            self.category = category
        self.context = context

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.category]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "error": type(self).__name__,
            "category": self.category.value,
            "message": str(self),
            "context": self.context,
        }


# CSV ingestion and series validation

class MissingColumn(RankAnalysisError):
    def __init__(self, column: str):
        super().__init__(f"Missing required column: '{column}'", column=column)


class MalformedRow(RankAnalysisError):
    def __init__(self, line: int, field: str, reason: str):
        super().__init__(f"Malformed row at line {line}, field '{field}': {reason}",
                         line=line, field=field)


class DuplicateRank(RankAnalysisError):
    def __init__(self, time_label: str, rank: int, line: Optional[int] = None):
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"Rank {rank} repeated at time '{time_label}'{where}",
                         time_label=time_label, rank=rank, line=line)


class DuplicateElement(RankAnalysisError):
    def __init__(self, time_label: str, element: str):
        super().__init__(f"Element '{element}' appears twice at time '{time_label}'",
                         time_label=time_label, element=element)


class NonContiguousRanks(RankAnalysisError):
    def __init__(self, time_label: str, missing: int):
        super().__init__(f"Ranks at time '{time_label}' are not contiguous: rank {missing} is missing",
                         time_label=time_label, missing=missing)


class UnorderedScores(RankAnalysisError):
    def __init__(self, time_label: str, rank: int):
        super().__init__(f"Score increases at rank {rank} of time '{time_label}'",
                         time_label=time_label, rank=rank)


class InsufficientDepth(RankAnalysisError):
    def __init__(self, time_label: str, depth: int, requested: int):
        super().__init__(
            f"Snapshot '{time_label}' has only {depth} entries, {requested} requested",
            time_label=time_label, depth=depth, requested=requested)


class UnevenDepth(RankAnalysisError):
    def __init__(self, depths):
        low, high = min(depths, default=0), max(depths, default=0)
        super().__init__(
            f"Snapshots have uneven depth ({low}..{high}); truncate to a common top N first",
            min_depth=low, max_depth=high)


class OutOfRange(RankAnalysisError):
    def __init__(self, what: str, value: Any, lower: Any, upper: Any):
        super().__init__(f"{what}={value} outside [{lower}, {upper}]",
                         what=what, value=value, lower=lower, upper=upper)


class MissingScores(RankAnalysisError):
    def __init__(self, time_label: Optional[str] = None):
        where = f" at time '{time_label}'" if time_label is not None else ""
        super().__init__(f"No 'score' column{where}: distribution fitting needs scores",
                         time_label=time_label)


class SnapshotNotFound(RankAnalysisError):
    def __init__(self, selector: str, available: int):
        super().__init__(f"Snapshot selector '{selector}' matches nothing ({available} snapshots)",
                         selector=selector)


class TooFewSnapshots(RankAnalysisError):
    category = ErrorCategory.SNAPSHOTS

    def __init__(self, T: int, required: int = 2):
        super().__init__(f"Need at least {required} snapshots, got T={T}", T=T, required=required)


# Distribution models and fitting

class UnknownModel(RankAnalysisError):
    def __init__(self, name: str):
        super().__init__(f"Unknown model: '{name}' (expected m1..m5)", model=name)


class InvalidParams(RankAnalysisError):
    pass


class InsufficientData(RankAnalysisError):
    category = ErrorCategory.FIT


class NonPositiveScore(RankAnalysisError):
    category = ErrorCategory.FIT

    def __init__(self, rank: int, score: float):
        super().__init__(f"Score {score} at rank {rank} is not positive; log-space fit undefined",
                         rank=rank, score=score)


class FitDiverged(RankAnalysisError):
    category = ErrorCategory.FIT


class NegativeValue(RankAnalysisError):
    def __init__(self, rank: int, value: float):
        super().__init__(f"Negative value {value} at rank {rank}", rank=rank, value=value)


class AllZero(RankAnalysisError):
    def __init__(self):
        super().__init__("All values are zero; cannot normalize")


# Goodness of fit

class LengthMismatch(RankAnalysisError):
    def __init__(self, left: int, right: int):
        super().__init__(f"Length mismatch: {left} vs {right}", left=left, right=right)


class ZeroVariance(RankAnalysisError):
    def __init__(self):
        super().__init__("Observed values have zero variance")


class SupportMismatch(RankAnalysisError):
    pass


# Rank dynamics

class OutOfRangeEntropy(RankAnalysisError):
    def __init__(self, entropy: float):
        super().__init__(f"Entropy {entropy} outside [0, 1]", entropy=entropy)


class DegenerateCurve(RankAnalysisError):
    category = ErrorCategory.FIT


class EmptyCurve(RankAnalysisError):
    def __init__(self):
        super().__init__("Empirical diversity curve is empty")
