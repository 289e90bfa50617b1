"""Borda aggregation of complete and partial rankings.

Scores are kept as exact integers: every Borda score is multiplied by
``score_scale(m)`` so that the generalized scores ``(m'+1-r)(m+1)/(m'+1)``
and the missing-label score ``(m+1)/2`` are whole numbers. Ties are then
detected exactly, and ordering by summed scores equals ordering by average
scores.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import lcm
from typing import Literal, Sequence

import numpy as np

from .ranking import Ranking, RankingError

__all__ = [
    "BordaScores",
    "TieBreakPolicy",
    "score_scale",
    "borda_scores",
    "borda_aggregate",
    "generalized_borda_aggregate",
    "ranking_from_scores",
    "scaled_score_vector",
]


@dataclass(frozen=True)
class TieBreakPolicy:
    """Ordering rule among labels with equal average score.

    ``lowest-label-index`` puts the lower label first. ``seeded-random`` uses
    a fixed random priority over labels drawn from ``seed``.
    """

    mode: Literal["lowest-label-index", "seeded-random"] = "lowest-label-index"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.mode not in ("lowest-label-index", "seeded-random"):
            raise ValueError(f"unknown tie-break mode {self.mode!r}")

    def priority(self, m: int) -> np.ndarray:
        """Rank of each label (0-based index) among tied labels; lower wins."""
        return _priority(self.mode, self.seed, m)


@lru_cache(maxsize=256)
def _priority(mode: str, seed: int, m: int) -> np.ndarray:
    if mode == "lowest-label-index":
        p = np.arange(m)
    else:
        perm = np.random.default_rng(np.random.SeedSequence([seed, m])).permutation(m)
        p = np.empty(m, dtype=np.int64)
        p[perm] = np.arange(m)
    p.setflags(write=False)
    return p


LOWEST_INDEX = TieBreakPolicy()


@lru_cache(maxsize=64)
def score_scale(m: int) -> int:
    """Smallest multiplier making every (generalized) Borda score over ``m`` labels integral."""
    return lcm(2, *range(2, m + 2))


def scaled_score_vector(r: Ranking) -> np.ndarray:
    """Borda scores of one ranking times ``score_scale(m)``, as int64.

    Observed label at rank ``r`` among ``m'``: ``(m'+1-r)(m+1)/(m'+1)``;
    missing label: ``(m+1)/2``. For complete rankings this is ``m+1-r``.
    """
    m = r.m
    scale = score_scale(m)
    mp = r.size
    pos = np.asarray(r.positions, dtype=np.int64)
    out = np.full(m, (m + 1) * scale // 2, dtype=np.int64)
    seen = pos > 0
    out[seen] = (mp + 1 - pos[seen]) * (m + 1) * scale // (mp + 1)
    return out


@dataclass(frozen=True)
class BordaScores:
    """Average Borda score per label (index ``i-1`` holds label ``i``)."""

    scores: tuple[float, ...]

    @property
    def m(self) -> int:
        return len(self.scores)

    def __getitem__(self, label: int) -> float:
        return self.scores[label - 1]


def _summed(rankings: Sequence[Ranking], m: int | None) -> tuple[np.ndarray, int]:
    if not rankings:
        raise RankingError("cannot aggregate an empty list of rankings")
    if m is None:
        m = rankings[0].m
    total = np.zeros(m, dtype=np.int64)
    for r in rankings:
        if r.m != m:
            raise RankingError(f"ranking over {r.m} labels, expected {m}")
        total += scaled_score_vector(r)
    return total, m


def borda_scores(rankings: Sequence[Ranking], m: int | None = None) -> BordaScores:
    total, m = _summed(rankings, m)
    denom = score_scale(m) * len(rankings)
    return BordaScores(tuple(float(t) / denom for t in total))


def ranking_from_scores(scores: np.ndarray, tie: TieBreakPolicy = LOWEST_INDEX) -> Ranking:
    """Complete ranking sorting labels by decreasing score, ties per ``tie``."""
    scores = np.asarray(scores)
    order = np.lexsort((tie.priority(len(scores)), -scores))
    return Ranking.from_order((order + 1).tolist(), len(scores))


def borda_aggregate(
    rankings: Sequence[Ranking], tie: TieBreakPolicy = LOWEST_INDEX
) -> Ranking:
    """Consensus of complete rankings by decreasing average Borda score."""
    for r in rankings:
        if not r.is_complete:
            raise RankingError("borda_aggregate needs complete rankings")
    total, _ = _summed(rankings, None)
    return ranking_from_scores(total, tie)


def generalized_borda_aggregate(
    rankings: Sequence[Ranking], m: int, tie: TieBreakPolicy = LOWEST_INDEX
) -> Ranking:
    """Consensus of possibly partial rankings; missing labels score ``(m+1)/2``."""
    total, _ = _summed(rankings, m)
    return ranking_from_scores(total, tie)
