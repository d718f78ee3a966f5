"""Parameter sweeps over the number of stages ``k`` and the threshold ``t_y``."""
from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field, replace
from typing import Sequence

from .metrics import EvalReport, evaluate
from .refine import RefineConfig, train_refinement

DEFAULT_K_GRID = (0, 1, 2, 3, 4, 5, 6)
DEFAULT_TY_GRID = (0.80, 0.50, 0.25, 0.12, 0.06, 0.03, 0.01, 0.00)
CSV_COLUMNS = ("param", "value", "rho", "mse", "mae", "train_s", "predict_s")


@dataclass(frozen=True)
class SweepEntry:
    value: float
    report: EvalReport
    train_s: float
    predict_s: float


@dataclass
class SweepResult:
    param: str
    entries: list = field(default_factory=list)

    def rows(self):
        for e in self.entries:
            yield {"param": self.param, "value": e.value, "rho": e.report.spearman_rho,
                   "mse": e.report.mse, "mae": e.report.mae,
                   "train_s": e.train_s, "predict_s": e.predict_s}

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
            w.writeheader()
            for row in self.rows():
                w.writerow(row)

    def to_table(self, path) -> None:
        """Whitespace-separated columns with a ``#`` header, readable by gnuplot."""
        with open(path, "w") as fh:
            fh.write("# " + " ".join(CSV_COLUMNS[1:]) + "\n")
            for row in self.rows():
                fh.write(" ".join(repr(row[c]) for c in CSV_COLUMNS[1:]) + "\n")


def _grid(values: Sequence[float]) -> list:
    if len(values) == 0:
        raise ValueError("sweep grid is empty")
    out = sorted(values)
    if any(a == b for a, b in zip(out, out[1:])):
        raise ValueError(f"sweep grid has duplicates: {values}")
    return out


def _run(param, values, X_train, y_train, X_test, y_test, make_config, n_jobs):
    result = SweepResult(param)
    for v in values:
        cfg = make_config(v)
        t0 = time.perf_counter()
        model = train_refinement(X_train, y_train, cfg, n_jobs=n_jobs)
        t1 = time.perf_counter()
        pred = model.predict(X_test)
        t2 = time.perf_counter()
        result.entries.append(SweepEntry(v, evaluate(y_test, pred), t1 - t0, t2 - t1))
    return result


def sweep_k(X_train, y_train, X_test, y_test, config: RefineConfig = None,
            k_values: Sequence[int] = DEFAULT_K_GRID, t_y: float = 0.0,
            n_jobs: int = 1) -> SweepResult:
    config = config or RefineConfig()
    values = [int(k) for k in _grid(k_values)]
    return _run("k", values, X_train, y_train, X_test, y_test,
                lambda k: replace(config, k=k, t_y=t_y), n_jobs)


def sweep_ty(X_train, y_train, X_test, y_test, config: RefineConfig = None,
             ty_values: Sequence[float] = DEFAULT_TY_GRID, k: int = 2,
             n_jobs: int = 1) -> SweepResult:
    config = config or RefineConfig()
    values = [float(t) for t in _grid(ty_values)]
    return _run("ty", values, X_train, y_train, X_test, y_test,
                lambda t: replace(config, k=k, t_y=t), n_jobs)
