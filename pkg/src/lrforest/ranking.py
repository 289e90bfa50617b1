"""Rankings over a fixed label set and the distances between them.

Labels are 1-based integers ``1..m``. A ranking stores, for every label, its
position (1 = most preferred) or 0 when the label is not observed.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

__all__ = [
    "Ranking",
    "RankingError",
    "RankDistanceReport",
    "parse_ranking",
    "format_ranking",
    "kendall_distance",
    "kendall_tau",
    "spearman_distance",
    "footrule_distance",
    "generalized_kendall_distance",
    "distance_report",
]


class RankingError(ValueError):
    """Raised for malformed rankings or incompatible ranking pairs."""


@dataclass(frozen=True)
class Ranking:
    """A strict complete or partial order over labels ``1..m``.

    ``positions[i - 1]`` is the position of label ``i``, or 0 if the label is
    missing. Observed positions always form ``1..m'`` with ``m' >= 1``.
    """

    positions: tuple[int, ...]

    def __post_init__(self) -> None:
        pos = tuple(int(p) for p in self.positions)
        object.__setattr__(self, "positions", pos)
        if not pos:
            raise RankingError("ranking over zero labels")
        seen = sorted(p for p in pos if p != 0)
        if any(p < 0 for p in pos):
            raise RankingError(f"negative position in {pos}")
        if seen != list(range(1, len(seen) + 1)):
            raise RankingError(f"positions {pos} are not a gap-free 1..m' sequence")
        if not seen:
            raise RankingError("ranking with no observed labels")

    @classmethod
    def from_order(cls, order: Iterable[int], m: int) -> Ranking:
        """Build from labels listed most to least preferred."""
        order = list(order)
        if m < 1:
            raise RankingError(f"label count must be >= 1, got {m}")
        pos = [0] * m
        for rank, label in enumerate(order, start=1):
            if not 1 <= label <= m:
                raise RankingError(f"label {label} outside [1, {m}]")
            if pos[label - 1]:
                raise RankingError(f"duplicate label {label}")
            pos[label - 1] = rank
        return cls(tuple(pos))

    @classmethod
    def from_permutation(cls, perm: Sequence[int]) -> Ranking:
        """Build a complete ranking from ``perm[i-1]`` = position of label ``i``."""
        r = cls(tuple(perm))
        if not r.is_complete:
            raise RankingError(f"{perm} is not a permutation")
        return r

    @classmethod
    def identity(cls, m: int) -> Ranking:
        return cls(tuple(range(1, m + 1)))

    @property
    def m(self) -> int:
        return len(self.positions)

    @property
    def size(self) -> int:
        """Number of observed labels (m')."""
        return sum(1 for p in self.positions if p)

    @property
    def is_complete(self) -> bool:
        return all(self.positions)

    @property
    def observed(self) -> frozenset[int]:
        return frozenset(i + 1 for i, p in enumerate(self.positions) if p)

    @property
    def order(self) -> tuple[int, ...]:
        """Observed labels from most to least preferred."""
        ranked = sorted((p, i + 1) for i, p in enumerate(self.positions) if p)
        return tuple(label for _, label in ranked)

    @property
    def top(self) -> int:
        return self.order[0]

    def position(self, label: int) -> int:
        return self.positions[label - 1]

    def reverse(self) -> Ranking:
        return Ranking.from_order(reversed(self.order), self.m)

    def restrict(self, labels: Iterable[int]) -> Ranking:
        """Keep only ``labels``, re-ranked 1..m' in their original relative order."""
        keep = set(labels)
        return Ranking.from_order([lab for lab in self.order if lab in keep], self.m)

    def __str__(self) -> str:
        return format_ranking(self)


def parse_ranking(text: str, m: int) -> Ranking:
    """Parse ``"4>2>3>5>1"`` (most preferred first) into a Ranking over ``m`` labels."""
    tokens = [t.strip() for t in text.strip().split(">")]
    labels = []
    for tok in tokens:
        if not tok.isdigit():
            raise RankingError(f"malformed label token {tok!r} in {text!r}")
        labels.append(int(tok))
    if len(labels) < 2:
        raise RankingError(f"ranking {text!r} has fewer than 2 labels")
    return Ranking.from_order(labels, m)


def format_ranking(r: Ranking) -> str:
    return ">".join(str(label) for label in r.order)


def _check_same_m(a: Ranking, b: Ranking) -> None:
    if a.m != b.m:
        raise RankingError(f"rankings over different label counts ({a.m} vs {b.m})")


def _pair_counts(a: Ranking, b: Ranking) -> tuple[int, int]:
    _check_same_m(a, b)
    common = [i for i in range(a.m) if a.positions[i] and b.positions[i]]
    if len(common) < 2:
        raise RankingError("rankings share no commonly observed label pair")
    pa, pb = a.positions, b.positions
    concordant = discordant = 0
    for i, j in combinations(common, 2):
        if (pa[i] - pa[j]) * (pb[i] - pb[j]) > 0:
            concordant += 1
        else:
            discordant += 1
    return concordant, discordant


def kendall_distance(a: Ranking, b: Ranking) -> int:
    """Number of label pairs ordered differently by ``a`` and ``b``.

    Only pairs observed in both rankings are compared.
    """
    return _pair_counts(a, b)[1]


def kendall_tau(a: Ranking, b: Ranking) -> float:
    """Kendall's tau in [-1, 1] over the commonly observed label pairs.

    For two complete rankings this is ``1 - 4 D_K / (m (m - 1))``.
    """
    c, d = _pair_counts(a, b)
    return (c - d) / (c + d)


def _complete_pair(a: Ranking, b: Ranking) -> None:
    _check_same_m(a, b)
    if not (a.is_complete and b.is_complete):
        raise RankingError("distance is only defined for complete rankings")


def spearman_distance(a: Ranking, b: Ranking) -> int:
    _complete_pair(a, b)
    return sum((x - y) ** 2 for x, y in zip(a.positions, b.positions))


def footrule_distance(a: Ranking, b: Ranking) -> int:
    _complete_pair(a, b)
    return sum(abs(x - y) for x, y in zip(a.positions, b.positions))


def generalized_kendall_distance(pi: Ranking, sigmas: Sequence[Ranking]) -> int:
    """Sum of Kendall distances from the complete ranking ``pi`` to each of ``sigmas``."""
    if not sigmas:
        raise RankingError("empty ranking list")
    if not pi.is_complete:
        raise RankingError("reference ranking must be complete")
    return sum(kendall_distance(pi, s) for s in sigmas)


@dataclass(frozen=True)
class RankDistanceReport:
    kendall: int
    spearman: int
    footrule: int
    tau: float


def distance_report(a: Ranking, b: Ranking) -> RankDistanceReport:
    """All distances between two complete rankings."""
    return RankDistanceReport(
        kendall=kendall_distance(a, b),
        spearman=spearman_distance(a, b),
        footrule=footrule_distance(a, b),
        tau=kendall_tau(a, b),
    )
