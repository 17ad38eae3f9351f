"""Chance-corrected rater agreement on an ordinal scale.

Two raters score the same items on a 1..k scale.  Observed and expected
disagreement are both weighted by the squared distance between categories,
so near-misses cost little and distant calls cost a lot:

    weight(i, j) = (i - j)^2 / (k - 1)^2
    kappa = 1 - sum(W * O) / sum(W * E)

with O the observed contingency matrix and E the outer product of the two
raters' marginal distributions, scaled to the same total.  kappa is 1 for
perfect agreement, 0 for chance-level agreement, negative when raters
disagree more than chance would predict.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from jure.core.errors import JureError


class LengthMismatch(JureError):
    def __init__(self, a: int, b: int):
        super().__init__(f"rating vectors differ in length: {a} vs {b}")


class DegenerateMarginals(JureError):
    """Both raters always used one category; chance disagreement is zero."""

    def __init__(self):
        super().__init__("expected disagreement is zero; kappa is undefined")


class BadRating(JureError):
    def __init__(self, value, k: int):
        super().__init__(f"rating {value!r} outside 1..{k}")


@dataclass(frozen=True)
class RatingVector:
    """One rater's scores for an ordered list of items."""

    rater_id: str
    ratings: tuple[int, ...]
    k: int = 5

    def __post_init__(self) -> None:
        if self.k < 2:
            raise ValueError(f"scale must have at least 2 categories, got k={self.k}")
        for value in self.ratings:
            if not isinstance(value, int) or isinstance(value, bool) or not 1 <= value <= self.k:
                raise BadRating(value, self.k)


@dataclass(frozen=True)
class AgreementResult:
    kappa: float
    observed: tuple[tuple[float, ...], ...]  # counts, sums to n
    expected: tuple[tuple[float, ...], ...]  # chance counts, sums to n
    weights: tuple[tuple[float, ...], ...]  # disagreement weights, 0 diagonal
    n: int

    def to_dict(self) -> dict:
        return {
            "kappa": self.kappa,
            "observed": [list(r) for r in self.observed],
            "expected": [list(r) for r in self.expected],
            "weights": [list(r) for r in self.weights],
            "n": self.n,
        }


def disagreement_weights(k: int) -> np.ndarray:
    idx = np.arange(k, dtype=np.float64)
    return (idx[:, None] - idx[None, :]) ** 2 / (k - 1) ** 2


def weighted_kappa(a: RatingVector, b: RatingVector) -> AgreementResult:
    if a.k != b.k:
        raise ValueError(f"raters use different scales: k={a.k} vs k={b.k}")
    if len(a.ratings) != len(b.ratings):
        raise LengthMismatch(len(a.ratings), len(b.ratings))
    n = len(a.ratings)
    if n == 0:
        raise DegenerateMarginals()
    k = a.k
    observed = np.zeros((k, k), dtype=np.float64)
    for ra, rb in zip(a.ratings, b.ratings):
        observed[ra - 1, rb - 1] += 1.0
    row = observed.sum(axis=1)
    col = observed.sum(axis=0)
    expected = np.outer(row, col) / n
    weights = disagreement_weights(k)
    expected_disagreement = float((weights * expected).sum())
    if expected_disagreement == 0.0:
        raise DegenerateMarginals()
    observed_disagreement = float((weights * observed).sum())
    kappa = 1.0 - observed_disagreement / expected_disagreement
    return AgreementResult(
        kappa=kappa,
        observed=tuple(tuple(r) for r in observed.tolist()),
        expected=tuple(tuple(r) for r in expected.tolist()),
        weights=tuple(tuple(r) for r in weights.tolist()),
        n=n,
    )


def agreement_heatmap(raters: list[RatingVector]) -> list[list[float | None]]:
    """Pairwise kappa matrix; undefined pairs stay None, self-pairs are 1."""
    size = len(raters)
    grid: list[list[float | None]] = [[None] * size for _ in range(size)]
    for i in range(size):
        grid[i][i] = 1.0
        for j in range(i + 1, size):
            try:
                value = weighted_kappa(raters[i], raters[j]).kappa
            except DegenerateMarginals:
                continue
            grid[i][j] = value
            grid[j][i] = value
    return grid
