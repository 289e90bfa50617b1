"""Label-ranking datasets: LRD-CSV I/O, KEBI conversion, corruption, folds.

LRD-CSV is UTF-8 comma-separated text. The header names ``d`` feature
columns followed by a final ``ranking`` column; each ranking cell uses the
``4>2>3>5>1`` grammar. The label count ``m`` is the largest label appearing
in the file (the header carries no label count).
"""

from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from .ranking import Ranking, RankingError, format_ranking, parse_ranking

__all__ = [
    "DataError",
    "Dataset",
    "CorruptionSpec",
    "load_dataset",
    "read_dataset",
    "save_dataset",
    "write_dataset",
    "corrupt_rankings",
    "deletion_mask",
    "corrupt_ranking_list",
    "kfold_split",
    "convert_kebi",
]

RANKING_COLUMN = "ranking"


class DataError(ValueError):
    """Raised for unreadable or inconsistent dataset input."""


@dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray
    rankings: tuple[Ranking, ...]
    names: tuple[str, ...]
    m: int
    _positions: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        X = np.asarray(self.features, dtype=np.float64)
        if X.ndim != 2:
            raise DataError("feature matrix must be 2-dimensional")
        object.__setattr__(self, "rankings", tuple(self.rankings))
        object.__setattr__(self, "names", tuple(self.names))
        if X.shape[0] == 0:
            raise DataError("no instances")
        if X.shape[0] != len(self.rankings):
            raise DataError(f"{X.shape[0]} feature rows but {len(self.rankings)} rankings")
        if X.shape[1] != len(self.names):
            raise DataError(f"{X.shape[1]} feature columns but {len(self.names)} names")
        if not np.all(np.isfinite(X)):
            raise DataError("feature values must be finite")
        if any(r.m != self.m for r in self.rankings):
            raise DataError(f"every ranking must be over m={self.m} labels")
        X.setflags(write=False)
        object.__setattr__(self, "features", X)
        pos = np.array([r.positions for r in self.rankings], dtype=np.int64)
        pos.setflags(write=False)
        object.__setattr__(self, "_positions", pos)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    @property
    def positions(self) -> np.ndarray:
        """n x m matrix of label positions, 0 where a label is missing."""
        return self._positions

    def subset(self, indices: Sequence[int] | np.ndarray) -> Dataset:
        idx = np.asarray(indices, dtype=np.intp)
        return Dataset(
            self.features[idx],
            tuple(self.rankings[i] for i in idx),
            self.names,
            self.m,
        )

    def with_rankings(self, rankings: Sequence[Ranking]) -> Dataset:
        return Dataset(self.features, tuple(rankings), self.names, self.m)

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.m == other.m
            and self.names == other.names
            and self.rankings == other.rankings
            and np.array_equal(self.features, other.features)
        )


def read_dataset(text: str) -> Dataset:
    """Parse LRD-CSV content."""
    rows = list(csv.reader(io.StringIO(text)))
    while rows and not any(c.strip() for c in rows[-1]):
        rows.pop()
    if not rows:
        raise DataError("missing header")
    header = [h.strip() for h in rows[0]]
    if len(header) < 2 or header[-1] != RANKING_COLUMN:
        raise DataError(f"header must end with a '{RANKING_COLUMN}' column")
    names = header[:-1]
    if len(set(header)) != len(header):
        raise DataError("duplicate column name in header")
    body = rows[1:]
    if not body:
        raise DataError("no instances")

    feats: list[list[float]] = []
    cells: list[tuple[int, str]] = []
    for lineno, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise DataError(f"row {lineno}: expected {len(header)} columns, got {len(row)}")
        try:
            values = [float(c) for c in row[:-1]]
        except ValueError as exc:
            raise DataError(f"row {lineno}: non-numeric feature cell ({exc})") from None
        if not all(math.isfinite(v) for v in values):
            raise DataError(f"row {lineno}: non-finite feature value")
        feats.append(values)
        cells.append((lineno, row[-1]))

    m = 0
    for lineno, cell in cells:
        for tok in cell.split(">"):
            tok = tok.strip()
            if not tok.isdigit():
                raise DataError(f"row {lineno}: malformed ranking {cell!r}")
            m = max(m, int(tok))
    rankings = []
    for lineno, cell in cells:
        try:
            rankings.append(parse_ranking(cell, m))
        except RankingError as exc:
            raise DataError(f"row {lineno}: {exc}") from None
    return Dataset(np.array(feats, dtype=np.float64), tuple(rankings), tuple(names), m)


def load_dataset(path: str | Path) -> Dataset:
    return read_dataset(Path(path).read_text(encoding="utf-8"))


def write_dataset(data: Dataset) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([*data.names, RANKING_COLUMN])
    for x, r in zip(data.features, data.rankings):
        w.writerow([*(repr(float(v)) for v in x), format_ranking(r)])
    return buf.getvalue()


def save_dataset(data: Dataset, path: str | Path) -> None:
    Path(path).write_text(write_dataset(data), encoding="utf-8", newline="\n")


GUARDS = ("drop", "keep-top", "restore-random")


@dataclass(frozen=True)
class CorruptionSpec:
    """Independent per-label deletion with probability ``p0``.

    ``guard`` handles rankings left with fewer than two labels:

    * ``"drop"`` removes the instance;
    * ``"keep-top"`` keeps the two best-ranked original labels;
    * ``"restore-random"`` puts back randomly chosen deleted labels.
    """

    p0: float
    seed: int = 0
    guard: Literal["drop", "keep-top", "restore-random"] = "drop"

    def __post_init__(self) -> None:
        if not 0.0 <= self.p0 <= 1.0:
            raise DataError(f"missing probability p0={self.p0} outside [0, 1]")
        if self.guard not in GUARDS:
            raise DataError(f"unknown guard {self.guard!r}")


def _corruption_draws(n: int, m: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x636F7272]))
    return rng.random((n, m)), rng.random((n, m))


def deletion_mask(n: int, m: int, spec: CorruptionSpec) -> np.ndarray:
    """Labels deleted before the two-label guard (True = deleted), n x m."""
    return _corruption_draws(n, m, spec.seed)[0] < spec.p0


def corrupt_ranking_list(
    rankings: Sequence[Ranking], spec: CorruptionSpec
) -> list[Ranking | None]:
    """Corrupted copy of every ranking; ``None`` where the guard drops it."""
    if not rankings:
        return []
    m = rankings[0].m
    for r in rankings:
        if not r.is_complete:
            raise DataError("corruption expects complete rankings")
    if spec.p0 == 0.0:
        return list(rankings)
    u, restore_order = _corruption_draws(len(rankings), m, spec.seed)
    out: list[Ranking | None] = []
    for i, r in enumerate(rankings):
        keep = u[i] >= spec.p0
        if keep.sum() < 2:
            if spec.guard == "drop":
                out.append(None)
                continue
            if spec.guard == "keep-top":
                out.append(r.restrict(r.order[:2]))
                continue
            deleted = np.flatnonzero(~keep)
            need = 2 - int(keep.sum())
            back = deleted[np.argsort(restore_order[i][deleted], kind="stable")[:need]]
            keep[back] = True
        out.append(r.restrict((np.flatnonzero(keep) + 1).tolist()))
    return out


def corrupt_rankings(data: Dataset, spec: CorruptionSpec) -> Dataset:
    """Delete each label of each ranking independently with probability ``p0``.

    Survivors keep their relative order and are re-ranked ``1..m'``. Every
    output ranking has at least two labels (see ``CorruptionSpec.guard``;
    with ``"drop"`` the output may hold fewer instances). Feature values are
    not modified and the result depends only on ``(data, spec)``.
    """
    corrupted = corrupt_ranking_list(data.rankings, spec)
    kept = [i for i, r in enumerate(corrupted) if r is not None]
    if not kept:
        raise DataError("no instance keeps two labels after corruption")
    if len(kept) == data.n:
        return data.with_rankings(corrupted)  # type: ignore[arg-type]
    return Dataset(
        data.features[kept], tuple(corrupted[i] for i in kept), data.names, data.m  # type: ignore[misc]
    )


def kfold_split(n: int, k: int, repetitions: int = 1, seed: int = 0) -> list[list[np.ndarray]]:
    """Per repetition, ``k`` disjoint test-index arrays covering ``range(n)``.

    Fold sizes differ by at most one; the first ``n % k`` folds get the extra
    instance.
    """
    if k < 2:
        raise DataError(f"need k >= 2 folds, got {k}")
    if n < k:
        raise DataError(f"cannot split {n} instances into {k} folds")
    if repetitions < 1:
        raise DataError("repetitions must be >= 1")
    plan = []
    for rep in range(repetitions):
        rng = np.random.default_rng(np.random.SeedSequence([seed, rep, 0x666F6C64]))
        perm = rng.permutation(n)
        plan.append([np.sort(f) for f in np.array_split(perm, k)])
    return plan


_LABEL_TOKEN = re.compile(r"^(?:[Ll]?(\d+)|([A-Za-z]))$")


def _kebi_label(tok: str) -> int:
    mt = _LABEL_TOKEN.match(tok.strip())
    if not mt:
        raise DataError(f"unrecognised label token {tok!r}")
    if mt.group(1) is not None:
        return int(mt.group(1))
    return ord(mt.group(2).lower()) - ord("a") + 1


def _kebi_rows(text: str) -> tuple[list[str], list[list[str]]]:
    lines = text.splitlines()
    if any(line.strip().lower().startswith("@relation") for line in lines[:50]) or any(
        line.strip().lower().startswith("@data") for line in lines
    ):
        names: list[str] = []
        rows: list[list[str]] = []
        in_data = False
        for line in lines:
            s = line.strip()
            if not s or s.startswith("%"):
                continue
            low = s.lower()
            if in_data:
                rows.append([c.strip() for c in next(csv.reader([s]))])
            elif low.startswith("@attribute"):
                names.append(s.split()[1].strip("'\""))
            elif low.startswith("@data"):
                in_data = True
        return names, rows
    parsed = [r for r in csv.reader(io.StringIO(text)) if any(c.strip() for c in r)]
    if not parsed:
        raise DataError("missing header")
    return [h.strip() for h in parsed[0]], [[c.strip() for c in r] for r in parsed[1:]]


def convert_kebi(text: str) -> Dataset:
    """Read a KEBI-style file (ARFF/XARFF or CSV) whose last column holds
    rankings such as ``L2>L1>L3`` (or ``b>a>c``) and return a Dataset.
    """
    names, rows = _kebi_rows(text)
    if len(names) < 2:
        raise DataError("need at least one feature column and a ranking column")
    if not rows:
        raise DataError("no instances")
    feats, orders = [], []
    for lineno, row in enumerate(rows, start=1):
        if len(row) != len(names):
            raise DataError(f"data row {lineno}: expected {len(names)} columns, got {len(row)}")
        try:
            feats.append([float(c) for c in row[:-1]])
        except ValueError:
            raise DataError(f"data row {lineno}: non-numeric feature cell") from None
        orders.append([_kebi_label(t) for t in row[-1].split(">")])
    m = max(max(o) for o in orders)
    rankings = []
    for lineno, order in enumerate(orders, start=1):
        if len(order) < 2:
            raise DataError(f"data row {lineno}: ranking has fewer than 2 labels")
        try:
            rankings.append(Ranking.from_order(order, m))
        except RankingError as exc:
            raise DataError(f"data row {lineno}: {exc}") from None
    feature_names = [n if n != RANKING_COLUMN else f"{n}_attr" for n in names[:-1]]
    return Dataset(np.array(feats, dtype=np.float64), tuple(rankings), tuple(feature_names), m)
