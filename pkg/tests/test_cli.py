import csv

import pytest

from poprefine.cli import main

FAST = ["--trees", "4", "--comp-trees", "3", "--boost-rounds", "5", "--k", "1"]


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["synth", "--n", "400", "--seed", "3", "--out", str(d / "s.tsv")]) == 0
    return d


@pytest.fixture(scope="module")
def model(corpus):
    path = corpus / "m.rfne"
    rc = main(["train", "--data", str(corpus / "s.tsv"), "--test-count", "80",
               "--model-out", str(path), *FAST])
    assert rc == 0
    return path


def test_train_prints_comparison(corpus, capsys):
    rc = main(["train", "--data", str(corpus / "s.tsv"), "--test-count", "80", *FAST])
    out = capsys.readouterr().out
    assert rc == 0
    assert "random forest (k=0)" in out and "linear regression" in out


def test_predict_evaluate_importance(corpus, model, capsys):
    out = corpus / "p.csv"
    assert main(["predict", "--model", str(model), "--data", str(corpus / "s.tsv"),
                 "--out", str(out)]) == 0
    rows = list(csv.DictReader(open(out)))
    assert len(rows) == 400 and set(rows[0]) == {"id", "prediction"}
    assert main(["evaluate", "--model", str(model), "--data", str(corpus / "s.tsv"),
                 "--csv", str(corpus / "e.csv")]) == 0
    assert main(["importance", "--model", str(model)]) == 0
    assert "cat_id" in capsys.readouterr().out
    assert (model.parent / (model.name + ".json")).exists()


def test_sweep(corpus):
    out = corpus / "sweep.csv"
    rc = main(["sweep", "--data", str(corpus / "s.tsv"), "--test-count", "80", "--param", "k",
               "--grid", "0,1", "--out", str(out), "--table", str(corpus / "sweep.dat"),
               *FAST])
    assert rc == 0
    assert len(list(csv.DictReader(open(out)))) == 2


def test_exit_codes(corpus, model, tmp_path):
    assert main(["train"]) == 2
    assert main(["train", "--data", str(corpus / "s.tsv"), "--k", "-1", *FAST[:-2]]) == 2
    assert main(["train", "--data", str(tmp_path / "none.tsv")]) == 3
    bad = tmp_path / "bad.rfne"
    data = bytearray(model.read_bytes())
    data[-1] ^= 0xFF
    bad.write_bytes(bytes(data))
    assert main(["importance", "--model", str(bad)]) == 4
    assert main(["importance", "--model", str(tmp_path / "none.rfne")]) == 4


def test_config_file(corpus, tmp_path, capsys):
    cfg = tmp_path / "c.conf"
    cfg.write_text(f"data = {corpus / 's.tsv'}\ntest-count = 80\ntrees = 3\n"
                   "comp_trees = 2\nboost-rounds = 3\nk = 2\n")
    assert main(["train", "--config", str(cfg)]) == 0
    assert "k=2" in capsys.readouterr().out
    # command-line flags win over the file
    assert main(["train", "--config", str(cfg), "--k", "1"]) == 0
    assert "k=1" in capsys.readouterr().out
    cfg.write_text("bogus = 1\n")
    assert main(["train", "--config", str(cfg)]) == 2
