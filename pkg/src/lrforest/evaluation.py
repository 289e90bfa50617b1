"""Repeated k-fold cross-validation scored by Kendall's tau, and report files."""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from joblib import Parallel, delayed

from .data import CorruptionSpec, DataError, Dataset, corrupt_ranking_list, kfold_split
from .forest import ForestConfig, predict_batch, train
from .ranking import Ranking, kendall_tau
from .stats import FriedmanResult, RankTable

__all__ = [
    "CvConfig",
    "EvalReport",
    "derive_seed",
    "mean_tau",
    "cross_validate",
    "report_csv",
    "evaluation_summary",
    "comparison_csv",
    "comparison_summary",
]


def derive_seed(*parts: int) -> int:
    """Deterministic 64-bit seed from integer parts."""
    return int(np.random.SeedSequence([p & 0xFFFFFFFFFFFFFFFF for p in parts]).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class CvConfig:
    folds: int = 10
    repetitions: int = 5
    seed: int = 0
    corruption: CorruptionSpec | None = None
    forest: ForestConfig = field(default_factory=ForestConfig)


@dataclass(frozen=True, eq=False)
class EvalReport:
    """Per-fold mean tau, shaped ``(repetitions, folds)``."""

    fold_taus: np.ndarray
    wall_time: float = 0.0

    @property
    def mean_tau(self) -> float:
        return float(np.mean(self.fold_taus))

    @property
    def std_tau(self) -> float:
        return float(np.std(self.fold_taus))


def mean_tau(predicted: Sequence, truth: Sequence) -> float:
    return float(np.mean([kendall_tau(p, t) for p, t in zip(predicted, truth, strict=True)]))


def _run_fold(
    data: Dataset,
    train_rankings: Sequence[Ranking | None],
    test_idx: np.ndarray,
    cfg: CvConfig,
    rep: int,
    fold: int,
) -> float:
    mask = np.array([r is not None for r in train_rankings], dtype=bool)
    mask[test_idx] = False
    train_idx = np.flatnonzero(mask)
    if train_idx.size == 0:
        raise DataError(f"repetition {rep}, fold {fold}: no training instance left after corruption")
    train_data = Dataset(
        data.features[train_idx],
        tuple(train_rankings[i] for i in train_idx),  # type: ignore[misc]
        data.names,
        data.m,
    )
    fc = cfg.forest
    forest_cfg = ForestConfig(
        nbr_tree=fc.nbr_tree,
        tree=fc.tree,
        master_seed=derive_seed(fc.master_seed, cfg.seed, rep, fold),
        tie=fc.tie,
    )
    forest = train(train_data, forest_cfg)
    pred = predict_batch(forest, data.features[test_idx])
    return mean_tau(pred, [data.rankings[i] for i in test_idx])


def cross_validate(data: Dataset, cfg: CvConfig = CvConfig(), n_jobs: int = 1) -> EvalReport:
    """``repetitions`` x ``folds`` cross-validation of the forest.

    When ``cfg.corruption`` is set, every ranking is corrupted once per
    repetition (seed derived from the corruption seed, the CV seed and the
    repetition) and only the training side of each fold sees the corrupted
    rankings. Test instances are always scored against their original
    rankings.
    """
    start = time.perf_counter()
    plan = kfold_split(data.n, cfg.folds, cfg.repetitions, cfg.seed)
    jobs = []
    for rep, folds in enumerate(plan):
        train_rankings: Sequence[Ranking | None] = data.rankings
        if cfg.corruption is not None and cfg.corruption.p0 > 0:
            spec = CorruptionSpec(
                cfg.corruption.p0,
                derive_seed(cfg.corruption.seed, cfg.seed, rep),
                cfg.corruption.guard,
            )
            train_rankings = corrupt_ranking_list(data.rankings, spec)
        for fold, test_idx in enumerate(folds):
            jobs.append((train_rankings, test_idx, rep, fold))
    if n_jobs == 1:
        taus = [_run_fold(data, tr, ti, cfg, r, f) for tr, ti, r, f in jobs]
    else:
        taus = Parallel(n_jobs=n_jobs)(
            delayed(_run_fold)(data, tr, ti, cfg, r, f) for tr, ti, r, f in jobs
        )
    fold_taus = np.array(taus, dtype=np.float64).reshape(cfg.repetitions, cfg.folds)
    return EvalReport(fold_taus, time.perf_counter() - start)


REPORT_HEADER = ("dataset", "method", "mean_tau", "std_tau", "rank")


def _csv(rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerows(rows)
    return buf.getvalue()


def report_csv(dataset: str, report: EvalReport, method: str = "LR-RF") -> str:
    return _csv([REPORT_HEADER, (dataset, method, f"{report.mean_tau:.3f}", f"{report.std_tau:.3f}", "1.00")])


def evaluation_summary(dataset: str, report: EvalReport, cfg: CvConfig) -> str:
    """Plain-text block; excludes wall time so reruns are byte-identical."""
    fc = cfg.forest
    p0 = cfg.corruption.p0 if cfg.corruption is not None else 0.0
    lines = [
        f"dataset: {dataset}",
        f"folds: {cfg.folds}",
        f"repetitions: {cfg.repetitions}",
        f"seed: {cfg.seed}",
        f"p0: {p0:g}",
        f"trees: {fc.nbr_tree}",
        f"depth: {fc.tree.d_max}",
        f"mean_tau: {report.mean_tau:.3f}",
        f"std_tau: {report.std_tau:.3f}",
        "fold_taus: " + " ".join(f"{t:.3f}" for t in report.fold_taus.ravel()),
    ]
    return "\n".join(lines) + "\n"


def comparison_csv(table: RankTable) -> str:
    rows: list[Sequence[str]] = [REPORT_HEADER]
    for i, ds in enumerate(table.datasets):
        for j, method in enumerate(table.methods):
            rows.append((ds, method, f"{table.scores[i, j]:.3f}", "", f"{table.ranks[i, j]:.2f}"))
    for j, method in enumerate(table.methods):
        rows.append(("avg.rank", method, "", "", f"{table.avg_ranks[j]:.2f}"))
    return _csv(rows)


def comparison_summary(
    table: RankTable, friedman: FriedmanResult, cd: float | None, alpha: float
) -> str:
    lines = [f"methods: {table.n_methods}", f"datasets: {table.n_datasets}"]
    lines += [f"avg_rank {m}: {r:.2f}" for m, r in zip(table.methods, table.avg_ranks)]
    lines += [
        f"chi2_F: {friedman.chi2:.2f}",
        f"F_F: {friedman.statistic:.2f}",
        f"df: ({friedman.df1}, {friedman.df2})",
        f"p_value: {friedman.p_value:.4g}",
        f"alpha: {alpha:g}",
        "CD: " + (f"{cd:.2f}" if cd is not None else "n/a"),
    ]
    return "\n".join(lines) + "\n"
