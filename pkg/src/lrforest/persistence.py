"""Text model files for trained forests.

Layout (UTF-8, LF line endings)::

    LRRF-MODEL 1
    config {"nbr_tree": ..., ...}
    m 3
    d 4
    names a1,a2,a3,a4
    tree 0 5
    S 2 0.167
    L 1>2>3;1>2>3
    ...
    checksum <sha256 of every preceding line>

Trees are written in preorder. ``S <attribute> <threshold>`` is a split
(the left child follows immediately); ``L`` lists the leaf's rankings,
separated by ``;``. Thresholds use Python's shortest round-trip float repr.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from .aggregation import TieBreakPolicy
from .forest import Forest, ForestConfig
from .ranking import RankingError, format_ranking, parse_ranking
from .tree import Leaf, Split, SplitRule, TreeConfig, TreeNode

__all__ = ["ModelFileError", "MAGIC", "VERSION", "dumps_model", "loads_model", "save_model", "load_model"]

MAGIC = "LRRF-MODEL"
VERSION = 1


class ModelFileError(ValueError):
    pass


def _config_dict(cfg: ForestConfig) -> dict:
    t = cfg.tree
    return {
        "nbr_tree": cfg.nbr_tree,
        "d_max": t.d_max,
        "epsilon0": t.epsilon0,
        "n_s": t.n_s,
        "min_node_size": t.min_node_size,
        "master_seed": cfg.master_seed,
        "tie_mode": cfg.tie.mode,
        "tie_seed": cfg.tie.seed,
    }


def _config_from(d: dict) -> ForestConfig:
    return ForestConfig(
        nbr_tree=d["nbr_tree"],
        tree=TreeConfig(d["d_max"], d["epsilon0"], d["n_s"], d["min_node_size"]),
        master_seed=d["master_seed"],
        tie=TieBreakPolicy(d["tie_mode"], d["tie_seed"]),
    )


def _write_tree(node: TreeNode, out: list[str]) -> None:
    stack = [node]
    while stack:
        n = stack.pop()
        if isinstance(n, Leaf):
            out.append("L " + ";".join(format_ranking(r) for r in n.rankings))
        else:
            out.append(f"S {n.rule.attribute} {n.rule.threshold!r}")
            stack.extend((n.right, n.left))


def dumps_model(forest: Forest) -> str:
    lines = [
        f"{MAGIC} {VERSION}",
        "config " + json.dumps(_config_dict(forest.config), sort_keys=True),
        f"m {forest.m}",
        f"d {forest.d}",
        "names " + ",".join(forest.names),
    ]
    for i, tree in enumerate(forest.trees):
        body: list[str] = []
        _write_tree(tree, body)
        lines.append(f"tree {i} {len(body)}")
        lines.extend(body)
    digest = hashlib.sha256(("\n".join(lines) + "\n").encode("utf-8")).hexdigest()
    lines.append(f"checksum {digest}")
    return "\n".join(lines) + "\n"


class _Reader:
    def __init__(self, lines: list[str]) -> None:
        self.lines = lines
        self.i = 0

    def next(self, what: str) -> str:
        if self.i >= len(self.lines):
            raise ModelFileError(f"truncated model file: expected {what}")
        line = self.lines[self.i]
        self.i += 1
        return line

    def field(self, key: str) -> str:
        line = self.next(key)
        head, _, rest = line.partition(" ")
        if head != key:
            raise ModelFileError(f"line {self.i}: expected '{key}', got {line[:40]!r}")
        return rest


def _read_tree(r: _Reader, m: int, d: int, count: int) -> TreeNode:
    lines = [r.next("tree node") for _ in range(count)]
    pos = 0

    def node() -> TreeNode:
        nonlocal pos
        if pos >= len(lines):
            raise ModelFileError("tree record ends before its last node")
        line = lines[pos]
        pos += 1
        if line.startswith("L "):
            try:
                rankings = tuple(parse_ranking(t, m) for t in line[2:].split(";"))
            except RankingError as exc:
                raise ModelFileError(f"bad leaf ranking: {exc}") from None
            return Leaf(rankings)
        if line.startswith("S "):
            parts = line.split()
            if len(parts) != 3:
                raise ModelFileError(f"bad split line {line!r}")
            attr, thr = int(parts[1]), float(parts[2])
            if not 0 <= attr < d:
                raise ModelFileError(f"split attribute {attr} outside [0, {d})")
            left = node()
            right = node()
            return Split(SplitRule(attr, thr), left, right)
        raise ModelFileError(f"unknown node line {line[:40]!r}")

    tree = node()
    if pos != len(lines):
        raise ModelFileError("tree record has trailing nodes")
    return tree


def loads_model(text: str) -> Forest:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ModelFileError("empty model file")
    head = lines[0].split()
    if len(head) != 2 or head[0] != MAGIC:
        raise ModelFileError("not a model file (bad magic header)")
    if head[1] != str(VERSION):
        raise ModelFileError(f"unsupported model version {head[1]} (expected {VERSION})")
    last = lines[-1]
    if not last.startswith("checksum "):
        raise ModelFileError("truncated model file: missing checksum")
    digest = hashlib.sha256(("\n".join(lines[:-1]) + "\n").encode("utf-8")).hexdigest()
    if last.split(" ", 1)[1] != digest:
        raise ModelFileError("checksum mismatch")

    r = _Reader(lines[:-1])
    r.next("header")
    try:
        config = _config_from(json.loads(r.field("config")))
        m = int(r.field("m"))
        d = int(r.field("d"))
        names_field = r.field("names")
        names = tuple(names_field.split(",")) if names_field else ()
        trees = []
        for i in range(config.nbr_tree):
            parts = r.field("tree").split()
            if len(parts) != 2 or int(parts[0]) != i:
                raise ModelFileError(f"expected tree record {i}")
            trees.append(_read_tree(r, m, d, int(parts[1])))
    except (KeyError, ValueError, json.JSONDecodeError) as exc:
        if isinstance(exc, ModelFileError):
            raise
        raise ModelFileError(f"malformed model file: {exc}") from None
    if r.i != len(r.lines):
        raise ModelFileError("unexpected content after the last tree")
    return Forest(tuple(trees), config, m, d, names)


def save_model(forest: Forest, path: str | Path) -> None:
    Path(path).write_text(dumps_model(forest), encoding="utf-8", newline="\n")


def load_model(path: str | Path) -> Forest:
    return loads_model(Path(path).read_text(encoding="utf-8"))
