import subprocess
import sys

import numpy as np
import pytest

from lrforest.cli import main
from lrforest.data import Dataset, load_dataset, read_dataset, save_dataset
from lrforest.ranking import Ranking, parse_ranking

P = Ranking.from_permutation
FAST = ["--trees", "4", "--depth", "5"]


@pytest.fixture()
def toy(tmp_path):
    rng = np.random.default_rng(0)
    protos = [P([1, 2, 3]), P([2, 3, 1]), P([3, 1, 2])]
    k = rng.integers(0, 3, size=45)
    X = np.eye(3)[k] * 2 + rng.normal(scale=0.5, size=(45, 3))
    path = tmp_path / "toy.csv"
    save_dataset(Dataset(X, tuple(protos[i] for i in k), ("a", "b", "c"), 3), path)
    return path


def test_train_predict(toy, tmp_path, capsys):
    model, out = tmp_path / "m.lrrf", tmp_path / "p.csv"
    assert main(["train", "--data", str(toy), "--out", str(model), "--seed", "3", *FAST]) == 0
    assert main(["predict", "--model", str(model), "--data", str(toy), "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "ranking" and len(lines) == 46
    assert all(parse_ranking(s, 3).is_complete for s in lines[1:])
    train_tau = float(capsys.readouterr().err.split("mean_tau:")[1])

    assert main(["evaluate", "--data", str(toy), "--folds", "3", "--reps", "1", *FAST]) == 0
    cv_out = capsys.readouterr().out
    cv_tau = float(cv_out.splitlines()[1].split(",")[2])
    assert train_tau >= cv_tau


def test_predict_features_only(toy, tmp_path, capsys):
    model = tmp_path / "m.lrrf"
    main(["train", "--data", str(toy), "--out", str(model), *FAST])
    feats = tmp_path / "f.csv"
    feats.write_text("a,b,c\n0,0,2\n2,0,0\n")
    assert main(["predict", "--model", str(model), "--data", str(feats)]) == 0
    cap = capsys.readouterr()
    assert cap.out.splitlines()[0] == "ranking" and len(cap.out.splitlines()) == 3
    assert cap.err == ""
    feats.write_text("a,b\n0,0\n")
    assert main(["predict", "--model", str(model), "--data", str(feats)]) == 3


def test_evaluate_byte_identical(toy, tmp_path):
    paths = []
    for i in range(2):
        rep, summ = tmp_path / f"r{i}.csv", tmp_path / f"s{i}.txt"
        args = ["evaluate", "--data", str(toy), "--seed", "7", "--folds", "3", "--reps", "2",
                "--p0", "0.3", "--report", str(rep), "--summary", str(summ), *FAST]
        assert main(args) == 0
        paths.append((rep.read_bytes(), summ.read_bytes()))
    assert paths[0] == paths[1]
    assert paths[0][0].startswith(b"dataset,method,mean_tau,std_tau,rank\ntoy,LR-RF,")


def test_corrupt(toy, tmp_path):
    out = tmp_path / "c.csv"
    assert main(["corrupt", "--data", str(toy), "--p0", "0.3", "--seed", "1", "--guard", "keep-top",
                 "--out", str(out)]) == 0
    data = load_dataset(out)
    orig = load_dataset(toy)
    assert data.n == orig.n and np.array_equal(data.features, orig.features)
    assert any(not r.is_complete for r in data.rankings)
    assert all(r.size >= 2 for r in data.rankings)
    assert main(["corrupt", "--data", str(toy), "--p0", "1.5", "--out", str(out)]) == 2


def test_convert(tmp_path):
    src, out = tmp_path / "k.txt", tmp_path / "k.csv"
    src.write_text("@relation x\n@attribute a numeric\n@attribute L RANKING {L1,L2}\n@data\n1,L2>L1\n2,L1>L2\n")
    assert main(["convert", "--in", str(src), "--out", str(out)]) == 0
    assert out.read_text() == "a,ranking\n1.0,2>1\n2.0,1>2\n"
    assert read_dataset(out.read_text()).m == 2


def test_compare(tmp_path, capsys, caplog):
    from pathlib import Path

    scores = Path(__file__).parent / "data" / "scores_complete.csv"
    out, summ = tmp_path / "ranks.csv", tmp_path / "summary.txt"
    assert main(["compare", "--scores", str(scores), "--out", str(out), "--summary", str(summ)]) == 0
    text = summ.read_text()
    assert "avg_rank LR-RF: 2.75" in text and "df: (6, 90)" in text and "CD: 2.01" in text
    assert out.read_text().splitlines()[-1] == "avg.rank,LR-RF,,,2.75"
    # no tabulated q for 11 methods: still succeeds, with a warning
    wide = tmp_path / "w.csv"
    wide.write_text("dataset," + ",".join(f"m{i}" for i in range(11)) + "\n"
                    + "\n".join(f"d{j}," + ",".join(str((i * j) % 7) for i in range(11)) for j in range(1, 5)) + "\n")
    assert main(["compare", "--scores", str(wide)]) == 0
    cap = capsys.readouterr()
    assert "CD: n/a" in cap.out and "pass --q" in caplog.text
    assert main(["compare", "--scores", str(wide), "--q", "2.8"]) == 0


def test_sweep(toy, tmp_path):
    out = tmp_path / "s.csv"
    assert main(["sweep", "--data", str(toy), "--param", "trees", "--values", "1,3",
                 "--folds", "3", "--reps", "1", "--out", str(out), "--depth", "4"]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "dataset,param,value,mean_tau,std_tau"
    assert [line.split(",")[:3] for line in lines[1:]] == [["toy", "trees", "1"], ["toy", "trees", "3"]]
    assert main(["sweep", "--data", str(toy), "--param", "p0", "--values", "a,b"]) == 2
    assert main(["sweep", "--data", str(toy), "--param", "p0", "--values", ","]) == 2


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["bogus"],
        ["train", "--data", "x.csv"],
        ["evaluate", "--data", "x.csv", "--folds", "1"],
        ["train", "--data", "x.csv", "--out", "m", "--trees", "0"],
    ],
)
def test_usage_errors(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    (tmp_path / "x.csv").write_text("a,ranking\n1,1>2\n")
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == 2


def test_data_errors(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,ranking\n1,1>1\n")
    assert main(["train", "--data", str(bad), "--out", str(tmp_path / "m")]) == 3
    assert "row 2" in capsys.readouterr().err
    assert main(["train", "--data", str(tmp_path / "missing.csv"), "--out", str(tmp_path / "m")]) == 3
    junk = tmp_path / "junk.lrrf"
    junk.write_text("hello\n")
    assert main(["predict", "--model", str(junk), "--data", str(bad)]) == 3


def test_internal_error_exit_code(toy, tmp_path, monkeypatch):
    import lrforest.cli as cli

    def boom(*a, **k):
        raise AssertionError("invariant")

    monkeypatch.setattr(cli, "train", boom)
    assert main(["train", "--data", str(toy), "--out", str(tmp_path / "m")]) == 4


def test_console_entry_point(toy, tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "lrforest.cli", "corrupt", "--data", str(toy), "--p0", "0",
         "--out", str(tmp_path / "same.csv")],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "same.csv").read_text() == toy.read_text()
