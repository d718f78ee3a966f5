"""Command-line interface.

Every subcommand accepts ``--config FILE`` with ``key = value`` lines whose
keys are flag names (``test-count = 500``); flags given on the command line
win over the file.

Exit codes: 0 success, 2 usage error, 3 data error, 4 model-file error.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .dataset import (DataFormat, SplitMode, SplitSpec, default_test_count, load_dataset,
                      read_column_map, write_dataset)
from .errors import DataError, MissingLabels, ModelFileError
from .forest import TreeParams, feature_importance
from .linear import fit_linear, predict_linear
from .metrics import evaluate, format_reports
from .persist import export_summary, load_model, save_model
from .pipeline import prepare_split
from .preprocess import FEATURE_NAMES, TextFeatureMode, digitize_all
from .refine import ForestConfig, RefineConfig, train_refinement
from .sweep import DEFAULT_K_GRID, DEFAULT_TY_GRID, sweep_k, sweep_ty
from .synth import SynthConfig, generate_synthetic

log = logging.getLogger("poprefine")

EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_MODEL = 4


class UsageError(Exception):
    pass


def read_config_file(path) -> dict:
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        out[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return out


def _fmt_for(path: str, explicit: str | None) -> DataFormat:
    if explicit:
        return DataFormat(explicit)
    return DataFormat.JSONL if str(path).endswith((".jsonl", ".json")) else DataFormat.TSV


def _load(args):
    column_map = read_column_map(args.columns) if getattr(args, "columns", None) else None
    data, warnings = load_dataset(args.data, _fmt_for(args.data, args.format), column_map)
    for col, count in sorted(warnings.items()):
        log.warning("%s: %d malformed value(s) in column %s loaded as absent",
                    args.data, count, col)
    return data


def _refine_config(args) -> RefineConfig:
    tree = TreeParams(max_depth=args.max_depth, min_samples_leaf=args.min_leaf,
                      features_per_split=args.features_per_split)
    comp_trees = args.comp_trees if args.comp_trees is not None else args.trees
    base = ForestConfig(tree, args.trees, True)
    comp = ForestConfig(tree, comp_trees, True)
    fields = dict(base=base, compensator=comp, boost_rounds=args.boost_rounds, seed=args.seed)
    if args.k is not None:
        fields["k"] = args.k
    if args.ty is not None:
        fields["t_y"] = args.ty
    if args.preset:
        return RefineConfig.preset(args.preset, **fields)
    return RefineConfig(**fields)


def _split_spec(args, data) -> SplitSpec:
    test_count = args.test_count or default_test_count(len(data))
    return SplitSpec(SplitMode(args.split), test_count, args.seed)


# --- subcommands -------------------------------------------------------------

def cmd_synth(args):
    cfg = SynthConfig(n=args.n, seed=args.seed, tail_frac=args.tail_frac, noise=args.noise)
    data = generate_synthetic(cfg)
    write_dataset(data, args.out, _fmt_for(args.out, args.format))
    print(f"wrote {len(data)} records to {args.out}")


def cmd_train(args):
    data = _load(args)
    config = _refine_config(args)
    mode = TextFeatureMode(args.text_mode)
    prep = prepare_split(data, _split_spec(args, data), mode)
    maps = prep.maps
    X_train, y_train, X_test, y_test = prep.X_train, prep.y_train, prep.X_test, prep.y_test

    t0 = time.perf_counter()
    model = train_refinement(X_train, y_train, config, n_jobs=args.jobs)
    elapsed = time.perf_counter() - t0
    for t in model.training_trace:
        log.info("iteration %d: train mse %.6g, threshold %.6g, compensated %d",
                 t.iteration, t.train_mse, t.threshold, t.extreme_count)

    reports = {
        f"refined (k={config.k}, t_y={config.t_y:g})": evaluate(y_test, model.predict(X_test)),
        "random forest (k=0)": evaluate(y_test, model.predict(X_test, stages=0)),
        "linear regression": evaluate(y_test, predict_linear(fit_linear(X_train, y_train), X_test)),
    }
    print(f"train n={len(y_train)}  test n={len(y_test)}  split={args.split}  "
          f"train time {elapsed:.1f}s")
    print(format_reports(reports))
    if args.model_out:
        save_model(model, maps, mode, config, args.model_out)
        summary = args.summary_out or f"{args.model_out}.json"
        export_summary(model, summary)
        print(f"saved model to {args.model_out} (summary: {summary})")


def cmd_predict(args):
    model, maps, mode, _ = load_model(args.model)
    data = _load(args)
    pred = model.predict(digitize_all(data.records, maps, mode))
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "prediction"])
        for i, (r, p) in enumerate(zip(data.records, pred)):
            w.writerow([r.pid if r.pid is not None else i, repr(float(p))])
    print(f"wrote {len(pred)} predictions to {args.out}")


def cmd_evaluate(args):
    model, maps, mode, _ = load_model(args.model)
    data = _load(args)
    if not data.has_labels:
        raise MissingLabels(f"{args.data}: evaluation needs a label on every record")
    X = digitize_all(data.records, maps, mode)
    y = data.labels
    reports = {"refined": evaluate(y, model.predict(X)),
               "random forest (k=0)": evaluate(y, model.predict(X, stages=0))}
    print(format_reports(reports))
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["model", "rho", "mse", "mae", "n"])
            for name, r in reports.items():
                w.writerow([name, r.spearman_rho, r.mse, r.mae, r.n])


def cmd_importance(args):
    model, _, _, _ = load_model(args.model)
    imp = feature_importance(model.base, len(FEATURE_NAMES))
    for name, v in zip(FEATURE_NAMES, imp):
        print(f"{name:<12} {v:.6f}")


def cmd_sweep(args):
    data = _load(args)
    config = _refine_config(args)
    mode = TextFeatureMode(args.text_mode)
    prep = prepare_split(data, _split_spec(args, data), mode)
    Xtr, ytr, Xte, yte = prep.X_train, prep.y_train, prep.X_test, prep.y_test
    if args.param == "k":
        grid = [int(v) for v in args.grid.split(",")] if args.grid else DEFAULT_K_GRID
        result = sweep_k(Xtr, ytr, Xte, yte, config, grid,
                         t_y=args.ty if args.ty is not None else 0.0, n_jobs=args.jobs)
    else:
        grid = [float(v) for v in args.grid.split(",")] if args.grid else DEFAULT_TY_GRID
        result = sweep_ty(Xtr, ytr, Xte, yte, config, grid,
                          k=args.k if args.k is not None else 2, n_jobs=args.jobs)
    result.to_csv(args.out)
    if args.table:
        result.to_table(args.table)
    for row in result.rows():
        print(f"{row['param']}={row['value']:<6g} rho={row['rho']:.4f} mse={row['mse']:.5f} "
              f"mae={row['mae']:.5f} train={row['train_s']:.2f}s predict={row['predict_s']:.3f}s")
    if args.plot:
        _plot_sweep(result, args.plot)


def _plot_sweep(result, path):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    xs = [e.value for e in result.entries]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(xs, [e.report.spearman_rho for e in result.entries], "o-")
    ax.set_xlabel(result.param)
    ax.set_ylabel("rank correlation")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def cmd_textlen_plot(args):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    data = _load(args)
    if not data.has_labels:
        raise MissingLabels(f"{args.data}: plotting needs labels")
    attr = "title" if args.field == "title" else "all_tags"
    lengths = np.array([len(getattr(r, attr)) for r in data.records])
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.scatter(lengths, data.labels, s=4, alpha=0.4)
    ax.set_xlabel(f"{args.field} length (characters)")
    ax.set_ylabel("popularity score")
    fig.tight_layout()
    fig.savefig(args.out, dpi=120)
    plt.close(fig)
    print(f"wrote {args.out}")


# --- parser ------------------------------------------------------------------

def _data_flags(p, required=True):
    p.add_argument("--data", required=required, help="dataset file (TSV or JSONL)")
    p.add_argument("--format", choices=[f.value for f in DataFormat],
                   help="data format (default: from file extension)")
    p.add_argument("--columns", help="column-mapping file: schema_name = file_column")


def _train_flags(p):
    p.add_argument("--split", choices=[m.value for m in SplitMode], default="random")
    p.add_argument("--test-count", type=int, default=0,
                   help="test-set size (default: 5614/305614 of the corpus)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--preset", choices=["effective", "efficient", "threshold-best", "quick"])
    p.add_argument("--k", type=int, help="refinement stages (default 4)")
    p.add_argument("--ty", type=float, help="threshold fraction of max |residual| (default 0)")
    p.add_argument("--text-mode", choices=[m.value for m in TextFeatureMode],
                   default=TextFeatureMode.TEXT_LENGTH.value)
    p.add_argument("--trees", type=int, default=100)
    p.add_argument("--comp-trees", type=int, help="trees per compensator (default: --trees)")
    p.add_argument("--max-depth", type=int)
    p.add_argument("--min-leaf", type=int, default=5)
    p.add_argument("--features-per-split", type=int, default=5)
    p.add_argument("--boost-rounds", type=int, default=50)
    p.add_argument("--jobs", type=int, default=1, help="threads for tree fitting")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file of flag defaults")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="poprefine", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="write a synthetic dataset")
    p.add_argument("--n", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tail-frac", type=float, default=0.05)
    p.add_argument("--noise", type=float, default=0.3)
    p.add_argument("--format", choices=[f.value for f in DataFormat])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", parents=[common], help="train and save a refinement model")
    _data_flags(p)
    _train_flags(p)
    p.add_argument("--model-out")
    p.add_argument("--summary-out", help="JSON config/trace export (default: MODEL.json)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", parents=[common], help="write predictions as CSV")
    p.add_argument("--model", required=True)
    _data_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", parents=[common], help="rho / MSE / MAE on labeled data")
    p.add_argument("--model", required=True)
    _data_flags(p)
    p.add_argument("--csv", help="also write the table as CSV")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("importance", parents=[common], help="base-forest feature importance")
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_importance)

    p = sub.add_parser("sweep", parents=[common], help="sweep k or t_y and write CSV")
    p.add_argument("--param", choices=["k", "ty"], required=True)
    p.add_argument("--grid", help="comma-separated values (default: the standard grid)")
    _data_flags(p)
    _train_flags(p)
    p.add_argument("--out", required=True, help="CSV output")
    p.add_argument("--table", help="also write a whitespace table for gnuplot")
    p.add_argument("--plot", help="also write a PNG of rho against the parameter")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("textlen-plot", parents=[common],
                       help="scatter popularity against title or tag text length")
    _data_flags(p)
    p.add_argument("--field", choices=["title", "tags"], default="title")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_textlen_plot)
    return parser


def _apply_config_file(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    values = read_config_file(known.config)
    # find the subparser for the requested command and seed its defaults
    subparsers = next(a for a in parser._actions
                      if isinstance(a, argparse._SubParsersAction))
    command = next((a for a in argv if a in subparsers.choices), None)
    if command is None:
        return
    sp = subparsers.choices[command]
    actions = {a.dest: a for a in sp._actions}
    defaults = {}
    for key, value in values.items():
        action = actions.get(key)
        if action is None or key in ("config", "help"):
            raise UsageError(f"{known.config}: unknown key {key!r} for '{command}'")
        if isinstance(action, argparse._StoreTrueAction):
            defaults[key] = value.lower() in ("1", "true", "yes", "on")
        else:
            defaults[key] = value
        # a config-file value satisfies a required flag
        action.required = False
    sp.set_defaults(**defaults)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"poprefine: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except ModelFileError as exc:
        print(f"poprefine: model file error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except DataError as exc:
        print(f"poprefine: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"poprefine: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return 0


if __name__ == "__main__":
    sys.exit(main())
