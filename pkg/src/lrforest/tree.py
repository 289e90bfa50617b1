"""Decision trees supervised by each ranking's top label.

Internal nodes test ``x[attribute] >= threshold`` (true goes left). Leaves
keep the training rankings routed to them; a prediction is the generalized
Borda consensus of those rankings.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator, Sequence, Union

import numpy as np

from .aggregation import LOWEST_INDEX, TieBreakPolicy, ranking_from_scores, scaled_score_vector
from .data import Dataset
from .ranking import Ranking, RankingError

__all__ = [
    "TreeConfig",
    "SplitRule",
    "Leaf",
    "Split",
    "TreeNode",
    "tlac_class",
    "node_entropy",
    "information_gain",
    "find_best_split",
    "build_tree",
    "leaf_neighbors",
    "tree_predict",
    "route",
    "iter_leaves",
    "tree_depth",
]


@dataclass(frozen=True)
class TreeConfig:
    """Growth limits for one tree.

    ``n_s`` is the number of attributes drawn at every node; ``None`` means
    ``floor(log2 d) + 1``. A node at depth ``d_max`` (the root is depth 1) is
    always a leaf.
    """

    d_max: int = 8
    epsilon0: float = 0.0
    n_s: int | None = None
    min_node_size: int = 1

    def __post_init__(self) -> None:
        if self.d_max < 1:
            raise ValueError("d_max must be >= 1")
        if self.epsilon0 < 0:
            raise ValueError("epsilon0 must be >= 0")
        if self.n_s is not None and self.n_s < 1:
            raise ValueError("n_s must be >= 1")
        if self.min_node_size < 1:
            raise ValueError("min_node_size must be >= 1")

    def attributes_per_node(self, d: int) -> int:
        n_s = self.n_s if self.n_s is not None else int(math.floor(math.log2(d))) + 1
        if n_s > d:
            raise ValueError(f"n_s={n_s} exceeds the {d} available attributes")
        return n_s


@dataclass(frozen=True)
class SplitRule:
    attribute: int
    threshold: float

    def goes_left(self, x: Sequence[float] | np.ndarray) -> bool:
        return x[self.attribute] >= self.threshold


@dataclass(frozen=True, eq=False)
class Leaf:
    rankings: tuple[Ranking, ...]
    scores: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if not self.rankings:
            raise ValueError("leaf with no rankings")
        if self.scores is None:
            total = np.zeros(self.rankings[0].m, dtype=np.int64)
            for r in self.rankings:
                total += scaled_score_vector(r)
            object.__setattr__(self, "scores", total)
        self.scores.setflags(write=False)

    def predict(self, tie: TieBreakPolicy = LOWEST_INDEX) -> Ranking:
        return ranking_from_scores(self.scores, tie)


@dataclass(frozen=True, eq=False)
class Split:
    rule: SplitRule
    left: TreeNode
    right: TreeNode


TreeNode = Union[Split, Leaf]


def tlac_class(r: Ranking) -> int:
    """Top label as class: the best-ranked observed label."""
    return r.top


def _entropy_from_counts(counts: Sequence[int] | np.ndarray) -> float:
    counts = np.asarray(counts, dtype=np.float64)
    counts = counts[counts > 0]
    n = counts.sum()
    if n == 0:
        return 0.0
    p = counts / n
    return float(-(p * np.log2(p)).sum()) + 0.0


def node_entropy(rankings: Sequence[Ranking]) -> float:
    """Entropy in bits of the top-label class distribution."""
    if not rankings:
        raise ValueError("entropy of an empty node")
    return _entropy_from_counts(list(Counter(tlac_class(r) for r in rankings).values()))


def information_gain(
    rankings: Sequence[Ranking], rule: SplitRule, features: np.ndarray
) -> float:
    """Parent entropy minus size-weighted child entropies for ``rule``.

    An empty child contributes nothing, so a rule sending everything one way
    has zero gain.
    """
    if not rankings:
        raise ValueError("information gain of an empty node")
    X = np.asarray(features, dtype=np.float64)
    left = X[:, rule.attribute] >= rule.threshold
    n = len(rankings)
    gain = node_entropy(rankings)
    for side in (left, ~left):
        part = [r for r, s in zip(rankings, side) if s]
        if part:
            gain -= len(part) / n * node_entropy(part)
    return gain


def _xlogx(c: np.ndarray) -> np.ndarray:
    out = np.zeros_like(c, dtype=np.float64)
    pos = c > 0
    out[pos] = c[pos] * np.log2(c[pos])
    return out


_GAIN_DECIMALS = 12


def _best_split(
    X: np.ndarray, y: np.ndarray, candidates: Sequence[int], n_classes: int
) -> tuple[SplitRule, float] | None:
    """Exhaustive threshold scan over ``candidates``; ``y`` holds 0-based classes."""
    n = len(y)
    total = np.bincount(y, minlength=n_classes).astype(np.float64)
    parent = math.log2(n) - _xlogx(total).sum() / n if n > 0 else 0.0
    best: tuple[SplitRule, float] | None = None
    best_gain = 0.0
    onehot = np.zeros((n, n_classes), dtype=np.float64)
    for a in sorted(candidates):
        col = X[:, a]
        order = np.argsort(col, kind="stable")
        v = col[order]
        bounds = np.flatnonzero(v[1:] != v[:-1]) + 1
        if bounds.size == 0:
            continue
        onehot[:] = 0.0
        onehot[np.arange(n), y[order]] = 1.0
        right = np.cumsum(onehot, axis=0)[bounds - 1]
        left = total - right
        n_r = bounds.astype(np.float64)
        n_l = n - n_r
        weighted = (
            _xlogx(n_r) - _xlogx(right).sum(axis=1) + _xlogx(n_l) - _xlogx(left).sum(axis=1)
        ) / n
        gains = np.round(parent - weighted, _GAIN_DECIMALS)
        k = int(np.argmax(gains))
        if gains[k] > best_gain:
            best_gain = float(gains[k])
            best = (SplitRule(int(a), float(v[bounds[k]])), best_gain)
    return best


def find_best_split(
    features: np.ndarray, rankings: Sequence[Ranking], candidate_attributes: Sequence[int]
) -> SplitRule | None:
    """Gain-maximizing rule over the candidate attributes, or None.

    Thresholds are the distinct attribute values at the node; rules leaving
    a child empty are not considered and only strictly positive gains count.
    Equal gains prefer the lower attribute, then the lower threshold.
    """
    if not rankings:
        return None
    X = np.asarray(features, dtype=np.float64)
    y = np.array([tlac_class(r) - 1 for r in rankings], dtype=np.intp)
    found = _best_split(X, y, candidate_attributes, rankings[0].m)
    return None if found is None else found[0]


class _Grower:
    def __init__(
        self, data: Dataset, config: TreeConfig, rng: np.random.Generator
    ) -> None:
        self.X = data.features
        self.rankings = data.rankings
        self.m = data.m
        self.d = data.d
        self.y = np.array([tlac_class(r) - 1 for r in data.rankings], dtype=np.intp)
        self.scores = np.array([scaled_score_vector(r) for r in data.rankings], dtype=np.int64)
        self.cfg = config
        self.n_s = config.attributes_per_node(self.d)
        self.rng = rng

    def leaf(self, idx: np.ndarray) -> Leaf:
        return Leaf(tuple(self.rankings[i] for i in idx), self.scores[idx].sum(axis=0))

    def grow(self, idx: np.ndarray, depth: int) -> TreeNode:
        cfg = self.cfg
        if depth >= cfg.d_max or len(idx) < cfg.min_node_size:
            return self.leaf(idx)
        y = self.y[idx]
        if _entropy_from_counts(np.bincount(y, minlength=self.m)) <= cfg.epsilon0:
            return self.leaf(idx)
        attrs = self.rng.choice(self.d, size=self.n_s, replace=False)
        found = _best_split(self.X[idx], y, attrs.tolist(), self.m)
        if found is None:
            return self.leaf(idx)
        rule = found[0]
        go_left = self.X[idx, rule.attribute] >= rule.threshold
        return Split(
            rule,
            self.grow(idx[go_left], depth + 1),
            self.grow(idx[~go_left], depth + 1),
        )


def build_tree(
    data: Dataset, config: TreeConfig, rng: np.random.Generator | int
) -> TreeNode:
    """Grow an unpruned tree on ``data``.

    A node becomes a leaf at depth ``d_max``, when its top-label entropy is
    at most ``epsilon0``, when it holds fewer than ``min_node_size``
    instances, or when no split has positive gain. Every node draws a fresh
    set of candidate attributes from ``rng``.
    """
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(rng)
    return _Grower(data, config, rng).grow(np.arange(data.n), 1)


def _descend(tree: TreeNode, x: np.ndarray) -> Leaf:
    node = tree
    while isinstance(node, Split):
        node = node.left if x[node.rule.attribute] >= node.rule.threshold else node.right
    return node


def _check_x(tree: TreeNode, x: Sequence[float] | np.ndarray, d: int | None) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise RankingError("feature vector must be 1-dimensional")
    if d is not None and x.shape[0] != d:
        raise RankingError(f"feature vector has {x.shape[0]} values, expected {d}")
    for leaf_or_split in _iter_splits(tree):
        if leaf_or_split.rule.attribute >= x.shape[0]:
            raise RankingError("feature vector too short for this tree")
    return x


def _iter_splits(tree: TreeNode) -> Iterator[Split]:
    stack = [tree]
    while stack:
        node = stack.pop()
        if isinstance(node, Split):
            yield node
            stack.extend((node.right, node.left))


def leaf_neighbors(
    tree: TreeNode, x: Sequence[float] | np.ndarray, d: int | None = None
) -> tuple[Ranking, ...]:
    """Training rankings stored in the leaf that ``x`` reaches."""
    return _descend(tree, _check_x(tree, x, d)).rankings


def tree_predict(
    tree: TreeNode,
    x: Sequence[float] | np.ndarray,
    tie: TieBreakPolicy = LOWEST_INDEX,
    d: int | None = None,
) -> Ranking:
    return _descend(tree, _check_x(tree, x, d)).predict(tie)


def iter_leaves(tree: TreeNode) -> Iterator[Leaf]:
    """Leaves in preorder (left subtree first)."""
    stack = [tree]
    while stack:
        node = stack.pop()
        if isinstance(node, Leaf):
            yield node
        else:
            stack.extend((node.right, node.left))


def tree_depth(tree: TreeNode) -> int:
    if isinstance(tree, Leaf):
        return 1
    return 1 + max(tree_depth(tree.left), tree_depth(tree.right))


def route(tree: TreeNode, X: np.ndarray) -> tuple[np.ndarray, list[Leaf]]:
    """Leaf (preorder number) reached by every row of ``X``, plus the leaf list."""
    leaves: list[Leaf] = []
    out = np.empty(X.shape[0], dtype=np.intp)

    def walk(node: TreeNode, idx: np.ndarray) -> None:
        if isinstance(node, Leaf):
            out[idx] = len(leaves)
            leaves.append(node)
            return
        go_left = X[idx, node.rule.attribute] >= node.rule.threshold
        walk(node.left, idx[go_left])
        walk(node.right, idx[~go_left])

    walk(tree, np.arange(X.shape[0]))
    return out, leaves
