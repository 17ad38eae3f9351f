from jure.metrics.kappa import (
    AgreementResult,
    BadRating,
    DegenerateMarginals,
    LengthMismatch,
    RatingVector,
    agreement_heatmap,
    disagreement_weights,
    weighted_kappa,
)
from jure.metrics.stats import (
    DistributionRow,
    InvocationStats,
    UnlabeledTrace,
    ZeroDenominator,
    invocation_frequency,
    round_percent,
    subtask_distribution,
)

__all__ = [
    "AgreementResult",
    "BadRating",
    "DegenerateMarginals",
    "DistributionRow",
    "InvocationStats",
    "LengthMismatch",
    "RatingVector",
    "UnlabeledTrace",
    "ZeroDenominator",
    "agreement_heatmap",
    "disagreement_weights",
    "invocation_frequency",
    "round_percent",
    "subtask_distribution",
    "weighted_kappa",
]
