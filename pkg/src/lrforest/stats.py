"""Average-rank comparison of several methods over several datasets.

Friedman statistic in the Iman-Davenport F form, and the two-tailed
Bonferroni-Dunn critical difference for comparing one method against the
rest.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats as sps

__all__ = [
    "StatsError",
    "RankTable",
    "FriedmanResult",
    "BONFERRONI_DUNN_Q",
    "rank_rows",
    "average_ranks",
    "rank_table",
    "read_score_table",
    "friedman_test",
    "critical_difference",
]


class StatsError(ValueError):
    pass


# Two-tailed Bonferroni-Dunn critical values q_alpha, keyed by alpha then by
# number of methods k (Demsar 2006, Table 5b; k=12 as used for 12 methods).
BONFERRONI_DUNN_Q: dict[float, dict[int, float]] = {
    0.05: {2: 1.960, 3: 2.241, 4: 2.394, 5: 2.498, 6: 2.576, 7: 2.638, 8: 2.690,
           9: 2.724, 10: 2.773, 12: 2.871},
    0.10: {2: 1.645, 3: 1.960, 4: 2.128, 5: 2.241, 6: 2.326, 7: 2.394, 8: 2.450,
           9: 2.498, 10: 2.539},
}


@dataclass(frozen=True, eq=False)
class RankTable:
    datasets: tuple[str, ...]
    methods: tuple[str, ...]
    scores: np.ndarray
    ranks: np.ndarray
    avg_ranks: np.ndarray

    @property
    def n_datasets(self) -> int:
        return len(self.datasets)

    @property
    def n_methods(self) -> int:
        return len(self.methods)


def rank_rows(scores: np.ndarray) -> np.ndarray:
    """Per-row ranks, 1 = highest score, ties sharing their mean position."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 2:
        raise StatsError("score table must be 2-dimensional")
    if not np.all(np.isfinite(scores)):
        raise StatsError("score table has missing cells")
    return sps.rankdata(-scores, method="average", axis=1)


def average_ranks(scores: np.ndarray) -> np.ndarray:
    """Mean rank of every method (column) over the datasets (rows)."""
    return rank_rows(scores).mean(axis=0)


def rank_table(
    datasets: Sequence[str], methods: Sequence[str], scores: np.ndarray
) -> RankTable:
    scores = np.asarray(scores, dtype=np.float64)
    if scores.shape != (len(datasets), len(methods)):
        raise StatsError(
            f"score table shape {scores.shape} does not match "
            f"{len(datasets)} datasets x {len(methods)} methods"
        )
    ranks = rank_rows(scores)
    return RankTable(tuple(datasets), tuple(methods), scores, ranks, ranks.mean(axis=0))


def read_score_table(text: str) -> RankTable:
    """Wide CSV: a ``dataset`` column, then one score column per method."""
    rows = [r for r in csv.reader(io.StringIO(text)) if any(c.strip() for c in r)]
    if not rows:
        raise StatsError("empty score table")
    header = [h.strip() for h in rows[0]]
    if len(header) < 3:
        raise StatsError("score table needs a dataset column and at least two methods")
    names, values = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise StatsError(f"row {lineno}: expected {len(header)} columns")
        names.append(row[0].strip())
        try:
            values.append([float(c) if c.strip() else math.nan for c in row[1:]])
        except ValueError:
            raise StatsError(f"row {lineno}: non-numeric score") from None
    if not values:
        raise StatsError("score table has no datasets")
    return rank_table(names, header[1:], np.array(values))


@dataclass(frozen=True)
class FriedmanResult:
    chi2: float
    statistic: float
    df1: int
    df2: int
    p_value: float


def friedman_test(avg_ranks: Sequence[float], n_datasets: int) -> FriedmanResult:
    """Iman-Davenport F_F from average ranks of ``k`` methods over ``N`` datasets.

    chi2_F = 12N/(k(k+1)) * (sum R_j^2 - k(k+1)^2/4)
    F_F    = (N-1) chi2_F / (N(k-1) - chi2_F),  df = (k-1, (k-1)(N-1))
    """
    R = np.asarray(avg_ranks, dtype=np.float64)
    k, N = R.size, n_datasets
    if k < 2 or N < 2:
        raise StatsError("need at least 2 methods and 2 datasets")
    chi2 = 12.0 * N / (k * (k + 1)) * (float(np.sum(R**2)) - k * (k + 1) ** 2 / 4.0)
    chi2 = max(chi2, 0.0)
    denom = N * (k - 1) - chi2
    if denom <= 0:
        raise StatsError("Friedman statistic undefined: methods ranked identically on every dataset")
    df1, df2 = k - 1, (k - 1) * (N - 1)
    ff = (N - 1) * chi2 / denom
    return FriedmanResult(chi2, ff, df1, df2, float(sps.f.sf(ff, df1, df2)))


def critical_difference(
    k: int, n_datasets: int, q_alpha: float | None = None, alpha: float = 0.05
) -> float:
    """Bonferroni-Dunn CD = q_alpha * sqrt(k(k+1) / (6N))."""
    if k < 2 or n_datasets < 1:
        raise StatsError("need k >= 2 methods and N >= 1 datasets")
    if q_alpha is None:
        try:
            q_alpha = BONFERRONI_DUNN_Q[alpha][k]
        except KeyError:
            raise StatsError(f"no tabulated q for k={k}, alpha={alpha}; supply q_alpha") from None
    if q_alpha <= 0:
        raise StatsError("q_alpha must be positive")
    return q_alpha * math.sqrt(k * (k + 1) / (6.0 * n_datasets))
