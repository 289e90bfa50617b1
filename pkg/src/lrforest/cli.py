"""Command-line interface: ``lrforest <subcommand> ...``.

Exit status: 0 success, 2 usage error, 3 input/data error, 4 internal
invariant violation. Diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .aggregation import TieBreakPolicy
from .data import GUARDS, CorruptionSpec, DataError, convert_kebi, corrupt_rankings, load_dataset, save_dataset
from .evaluation import (
    CvConfig,
    comparison_csv,
    comparison_summary,
    cross_validate,
    evaluation_summary,
    mean_tau,
    report_csv,
)
from .forest import ForestConfig, predict_batch, train
from .persistence import ModelFileError, load_model, save_model
from .ranking import RankingError, format_ranking
from .stats import StatsError, critical_difference, friedman_test, read_score_table
from .tree import TreeConfig

log = logging.getLogger("lrforest")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _add_forest_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--trees", type=int, default=50, help="number of trees (default 50)")
    p.add_argument("--depth", type=int, default=8, help="maximum tree depth d_max (default 8)")
    p.add_argument("--ns", type=int, default=None, help="attributes per node (default floor(log2 d)+1)")
    p.add_argument("--epsilon0", type=float, default=0.0, help="entropy stop threshold in bits")
    p.add_argument("--min-node-size", type=int, default=1)
    p.add_argument("--tie", choices=("lowest-label-index", "seeded-random"), default="lowest-label-index")
    p.add_argument("--tie-seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1, help="worker processes")


def _add_cv_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, type=Path)
    p.add_argument("--p0", type=float, default=0.0, help="missing-label probability for training folds")
    p.add_argument("--guard", choices=GUARDS, default="drop")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    _add_forest_args(p)


def _forest_config(a: argparse.Namespace, seed: int) -> ForestConfig:
    try:
        return ForestConfig(
            nbr_tree=a.trees,
            tree=TreeConfig(a.depth, a.epsilon0, a.ns, a.min_node_size),
            master_seed=seed,
            tie=TieBreakPolicy(a.tie, a.tie_seed),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _cv_config(a: argparse.Namespace, **override) -> CvConfig:
    p0 = override.get("p0", a.p0)
    if a.folds < 2 or a.reps < 1:
        raise UsageError("need --folds >= 2 and --reps >= 1")
    cfg_args = {k: v for k, v in vars(a).items()}
    cfg_args.update(override)
    ns = argparse.Namespace(**cfg_args)
    try:
        corruption = CorruptionSpec(p0, a.seed, a.guard) if p0 > 0 else None
    except DataError as exc:
        raise UsageError(str(exc)) from None
    return CvConfig(a.folds, a.reps, a.seed, corruption, _forest_config(ns, a.seed))


def _write(path: Path | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text, encoding="utf-8", newline="\n")


def cmd_train(a: argparse.Namespace) -> int:
    data = load_dataset(a.data)
    forest = train(data, _forest_config(a, a.seed), n_jobs=a.jobs)
    save_model(forest, a.out)
    log.info("trained %d trees on %d instances", len(forest.trees), data.n)
    return EXIT_OK


def _read_features(path: Path, d: int):
    text = path.read_text(encoding="utf-8")
    header = next(csv.reader(io.StringIO(text)), [])
    if header and header[-1].strip() == "ranking":
        data = load_dataset(path)
        return data.features, data.rankings
    rows = [r for r in csv.reader(io.StringIO(text)) if any(c.strip() for c in r)][1:]
    try:
        X = np.array([[float(c) for c in r] for r in rows], dtype=np.float64)
    except ValueError:
        raise DataError("non-numeric feature cell") from None
    return X.reshape(len(rows), d) if X.size == 0 else X, None


def cmd_predict(a: argparse.Namespace) -> int:
    forest = load_model(a.model)
    X, truth = _read_features(a.data, forest.d)
    if X.ndim != 2 or X.shape[1] != forest.d:
        raise DataError(f"model expects {forest.d} features per row")
    pred = predict_batch(forest, X, n_jobs=a.jobs)
    _write(a.out, "ranking\n" + "".join(format_ranking(r) + "\n" for r in pred))
    if truth is not None and pred:
        print(f"mean_tau: {mean_tau(pred, truth):.3f}", file=sys.stderr)
    return EXIT_OK


def cmd_evaluate(a: argparse.Namespace) -> int:
    data = load_dataset(a.data)
    cfg = _cv_config(a)
    report = cross_validate(data, cfg, n_jobs=a.jobs)
    name = a.data.stem
    csv_text = report_csv(name, report)
    summary = evaluation_summary(name, report, cfg)
    if a.report is None and a.summary is None:
        sys.stdout.write(csv_text + "\n" + summary)
    else:
        _write(a.report, csv_text)
        _write(a.summary, summary)
    log.info("evaluate %s: %.1f s", name, report.wall_time)
    return EXIT_OK


def cmd_corrupt(a: argparse.Namespace) -> int:
    data = load_dataset(a.data)
    try:
        spec = CorruptionSpec(a.p0, a.seed, a.guard)
    except DataError as exc:
        raise UsageError(str(exc)) from None
    save_dataset(corrupt_rankings(data, spec), a.out)
    return EXIT_OK


def cmd_convert(a: argparse.Namespace) -> int:
    data = convert_kebi(a.input.read_text(encoding="utf-8"))
    save_dataset(data, a.out)
    return EXIT_OK


def cmd_compare(a: argparse.Namespace) -> int:
    table = read_score_table(a.scores.read_text(encoding="utf-8"))
    ff = friedman_test(table.avg_ranks, table.n_datasets)
    try:
        cd = critical_difference(table.n_methods, table.n_datasets, a.q, a.alpha)
    except StatsError:
        if a.q is not None:
            raise
        log.warning("no tabulated Bonferroni-Dunn q for k=%d, alpha=%g; pass --q", table.n_methods, a.alpha)
        cd = None
    _write(a.out, comparison_csv(table))
    _write(a.summary, comparison_summary(table, ff, cd, a.alpha))
    return EXIT_OK


SWEEP_PARAMS = {"trees": int, "depth": int, "p0": float}


def cmd_sweep(a: argparse.Namespace) -> int:
    data = load_dataset(a.data)
    cast = SWEEP_PARAMS[a.param]
    try:
        values = [cast(v) for v in a.values.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"--values must be a comma-separated list of {cast.__name__}") from None
    if not values:
        raise UsageError("--values is empty")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("dataset", "param", "value", "mean_tau", "std_tau"))
    for v in values:
        cfg = _cv_config(a, **{a.param: v})
        report = cross_validate(data, cfg, n_jobs=a.jobs)
        w.writerow((a.data.stem, a.param, f"{v:g}", f"{report.mean_tau:.3f}", f"{report.std_tau:.3f}"))
        log.info("sweep %s=%g: mean tau %.3f", a.param, v, report.mean_tau)
    _write(a.out, buf.getvalue())
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse exits 2 on usage errors; keep that
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lrforest", description="Random forest label ranking.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="train a forest and write a model file")
    p.add_argument("--data", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--seed", type=int, default=0)
    _add_forest_args(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict rankings for every row of a CSV")
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--data", required=True, type=Path)
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="repeated k-fold cross-validation")
    _add_cv_args(p)
    p.add_argument("--report", type=Path, default=None, help="report CSV path (default stdout)")
    p.add_argument("--summary", type=Path, default=None, help="summary text path")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("corrupt", help="delete labels at random from every ranking")
    p.add_argument("--data", required=True, type=Path)
    p.add_argument("--p0", required=True, type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--guard", choices=GUARDS, default="drop")
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_corrupt)

    p = sub.add_parser("convert", help="convert a KEBI-style file to LRD-CSV")
    p.add_argument("--in", dest="input", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("compare", help="average ranks, Friedman F_F and critical difference")
    p.add_argument("--scores", required=True, type=Path)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--q", type=float, default=None, help="override the Bonferroni-Dunn q_alpha")
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--summary", type=Path, default=None)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="evaluate over a list of parameter values")
    _add_cv_args(p)
    p.add_argument("--param", required=True, choices=sorted(SWEEP_PARAMS))
    p.add_argument("--values", required=True)
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"lrforest: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, RankingError, ModelFileError, StatsError, OSError, UnicodeDecodeError) as exc:
        print(f"lrforest: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        log.debug("internal failure", exc_info=True)
        print(f"lrforest: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
