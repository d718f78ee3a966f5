import csv

import numpy as np
import pytest

from poprefine.forest import TreeParams
from poprefine.refine import ForestConfig, RefineConfig, train_refinement
from poprefine.sweep import CSV_COLUMNS, DEFAULT_TY_GRID, sweep_k, sweep_ty

SMALL = ForestConfig(TreeParams(min_samples_leaf=3), tree_count=6)
CFG = RefineConfig(base=SMALL, compensator=SMALL, boost_rounds=5, seed=2)


@pytest.fixture(scope="module")
def data():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(300, 5))
    y = X[:, 0] + np.where(X[:, 1] > 1.5, 6.0, 0.0) + 0.1 * rng.normal(size=300)
    return X[:200], y[:200], X[200:], y[200:]


def test_k0_entry_is_base(data):
    res = sweep_k(*data, config=CFG, k_values=[0])
    base = train_refinement(data[0], data[1], RefineConfig(k=0, base=SMALL, seed=2))
    pred = base.predict(data[2])
    assert res.entries[0].report.mse == pytest.approx(np.mean((pred - data[3]) ** 2), abs=0)


def test_csv_and_table(data, tmp_path):
    res = sweep_k(*data, config=CFG, k_values=[2, 0, 1])
    assert [e.value for e in res.entries] == [0, 1, 2]
    res.to_csv(tmp_path / "k.csv")
    with open(tmp_path / "k.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert tuple(rows[0]) == CSV_COLUMNS and len(rows) == 3
    res.to_table(tmp_path / "k.dat")
    lines = (tmp_path / "k.dat").read_text().splitlines()
    assert lines[0].startswith("#") and len(lines) == 4
    assert all(len(line.split()) == len(CSV_COLUMNS) - 1 for line in lines[1:])


def test_ty_default_grid(data):
    res = sweep_ty(*data, config=CFG, k=1)
    assert [e.value for e in res.entries] == sorted(DEFAULT_TY_GRID)
    assert all(np.isfinite(e.report.mse) for e in res.entries)


def test_grid_validation(data):
    with pytest.raises(ValueError):
        sweep_k(*data, config=CFG, k_values=[1, 1])
    with pytest.raises(ValueError):
        sweep_ty(*data, config=CFG, ty_values=[])
