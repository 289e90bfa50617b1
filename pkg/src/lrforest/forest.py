"""Random forest label ranker.

Each tree is grown on a bootstrap replicate using its own random stream,
seeded from ``(master_seed, tree_index)``. Results therefore never depend on
how trees are scheduled across workers. A query is answered in two steps:
every tree aggregates the rankings in the leaf it reaches, then the
per-tree rankings are Borda-aggregated into the final prediction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from joblib import Parallel, delayed

from .aggregation import LOWEST_INDEX, TieBreakPolicy, borda_aggregate, ranking_from_scores
from .data import DataError, Dataset
from .ranking import Ranking, RankingError
from .tree import TreeConfig, TreeNode, build_tree, route, tree_predict

__all__ = [
    "ForestConfig",
    "Forest",
    "tree_seed",
    "bootstrap_sample",
    "train",
    "predict",
    "predict_batch",
]


@dataclass(frozen=True)
class ForestConfig:
    nbr_tree: int = 50
    tree: TreeConfig = field(default_factory=TreeConfig)
    master_seed: int = 0
    tie: TieBreakPolicy = LOWEST_INDEX

    def __post_init__(self) -> None:
        if self.nbr_tree < 1:
            raise ValueError("nbr_tree must be >= 1")


@dataclass(frozen=True, eq=False)
class Forest:
    trees: tuple[TreeNode, ...]
    config: ForestConfig
    m: int
    d: int
    names: tuple[str, ...] = ()

    def predict(self, x: Sequence[float] | np.ndarray) -> Ranking:
        return predict(self, x)

    def predict_batch(self, X: Sequence[Sequence[float]] | np.ndarray, n_jobs: int = 1) -> list[Ranking]:
        return predict_batch(self, X, n_jobs=n_jobs)


def tree_seed(master_seed: int, index: int) -> np.random.SeedSequence:
    """Independent stream for tree ``index`` (0-based) of a forest."""
    return np.random.SeedSequence([master_seed & 0xFFFFFFFFFFFFFFFF, index])


def bootstrap_sample(data: Dataset, n: int | None, rng: np.random.Generator) -> Dataset:
    """``n`` instances drawn uniformly with replacement (default ``n = len(data)``)."""
    if data.n == 0:
        raise DataError("cannot bootstrap an empty dataset")
    size = data.n if n is None else n
    return data.subset(rng.integers(0, data.n, size=size))


def _grow_one(data: Dataset, config: ForestConfig, index: int) -> TreeNode:
    rng = np.random.default_rng(tree_seed(config.master_seed, index))
    replicate = bootstrap_sample(data, data.n, rng)
    return build_tree(replicate, config.tree, rng)


def train(data: Dataset, config: ForestConfig = ForestConfig(), n_jobs: int = 1) -> Forest:
    """Grow ``config.nbr_tree`` trees, optionally on ``n_jobs`` worker processes."""
    if data.n == 0:
        raise DataError("cannot train on an empty dataset")
    config.tree.attributes_per_node(data.d)
    if n_jobs == 1:
        trees = [_grow_one(data, config, i) for i in range(config.nbr_tree)]
    else:
        trees = Parallel(n_jobs=n_jobs)(
            delayed(_grow_one)(data, config, i) for i in range(config.nbr_tree)
        )
    return Forest(tuple(trees), config, data.m, data.d, data.names)


def _as_matrix(forest: Forest, X: Sequence[Sequence[float]] | np.ndarray) -> np.ndarray:
    try:
        X = np.asarray(X, dtype=np.float64)
    except ValueError:
        raise RankingError(f"feature vectors must all have length {forest.d}") from None
    if X.size == 0:
        return X.reshape(0, forest.d)
    if X.ndim != 2 or X.shape[1] != forest.d:
        raise RankingError(f"expected feature vectors of length {forest.d}, got shape {X.shape}")
    return X


def predict(forest: Forest, x: Sequence[float] | np.ndarray) -> Ranking:
    """Borda consensus of the per-tree predictions for one instance."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != forest.d:
        raise RankingError(f"expected a feature vector of length {forest.d}")
    per_tree = [tree_predict(t, x, forest.config.tie) for t in forest.trees]
    return borda_aggregate(per_tree, forest.config.tie)


def _tree_scores(tree: TreeNode, X: np.ndarray, tie: TieBreakPolicy, m: int) -> np.ndarray:
    """Borda score ``m + 1 - position`` of each label in this tree's prediction, per row."""
    leaf_of, leaves = route(tree, X)
    table = np.array([m + 1 - np.asarray(lf.predict(tie).positions) for lf in leaves], dtype=np.int64)
    return table[leaf_of]


def predict_batch(
    forest: Forest, X: Sequence[Sequence[float]] | np.ndarray, n_jobs: int = 1
) -> list[Ranking]:
    """``predict`` for every row of ``X``, in input order."""
    X = _as_matrix(forest, X)
    if X.shape[0] == 0:
        return []
    tie = forest.config.tie
    if n_jobs == 1:
        parts = [_tree_scores(t, X, tie, forest.m) for t in forest.trees]
    else:
        parts = Parallel(n_jobs=n_jobs)(
            delayed(_tree_scores)(t, X, tie, forest.m) for t in forest.trees
        )
    total = np.sum(parts, axis=0)
    return [ranking_from_scores(row, tie) for row in total]
