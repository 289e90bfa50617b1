"""Random forest label ranking."""

from .aggregation import TieBreakPolicy, borda_aggregate, generalized_borda_aggregate
from .data import CorruptionSpec, Dataset, corrupt_rankings, kfold_split, load_dataset
from .evaluation import CvConfig, EvalReport, cross_validate
from .forest import Forest, ForestConfig, predict, predict_batch, train
from .ranking import (
    Ranking,
    RankingError,
    format_ranking,
    kendall_distance,
    kendall_tau,
    parse_ranking,
)
from .tree import TreeConfig, build_tree, tree_predict

__version__ = "0.1.0"
