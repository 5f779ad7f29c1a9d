"""Command-line front end.

Individual commands mirror the library operations; `pipeline` chains them
(corpus -> imputation benchmark -> augmentation -> metrics -> figures) from a
single master seed and writes a manifest with the sha256 of every artifact.
Per-stage seeds derive from hash(master seed, stage name), so any stage can be
re-run in isolation with identical results.

Exit codes: 0 success, 1 data/compute error, 2 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .analyze import box_stats, correlation_matrix, group_by_class, kde
from .augment import (
    CganConfig,
    SmotencConfig,
    default_augment_plan,
    load_plan,
    two_stage_augment,
)
from .classify import CLASSIFIERS, ForestConfig, feature_importance, train_forest
from .encoding import build_codec, encode, label_indices
from .errors import DataError, TwkitError
from .impute import GainConfig, evaluate_imputation, gain_impute_table, impute_mice, impute_sta
from .metrics import compute_metrics
from .render import PlotSpec, render_box_grid, render_heatmap, render_importance_bar, render_violin_grid
from .schema import default_schema
from .seeds import derive_seed
from .synth import default_synthesis_spec, load_spec, synthesize_corpus
from .table import class_histogram, load_augmented_csv, save_csv, split_stratified
from .analyze import CorrelationMatrix


def _write_json(path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"{path}: {exc}") from exc


def _load_table(path, schema):
    table, _ = load_augmented_csv(path, schema)
    return table


# -- individual commands ---------------------------------------------------------


def cmd_synth(args) -> int:
    schema = default_schema()
    spec = load_spec(args.spec, schema) if args.spec else default_synthesis_spec()
    table = synthesize_corpus(spec, args.n, args.seed, schema)
    save_csv(table, args.out)
    print(f"wrote {args.n} rows to {args.out}")
    return 0


def cmd_impute(args) -> int:
    schema = default_schema()
    table = _load_table(args.infile, schema)
    if args.method == "sta":
        out = impute_sta(table)
    elif args.method == "mice":
        out = impute_mice(table, rounds=args.rounds, seed=args.seed)
    elif args.method == "gain":
        config = GainConfig(epochs=args.epochs)
        out = gain_impute_table(table, config, seed=args.seed)
    else:
        raise DataError(f"unknown method {args.method!r}")
    save_csv(out, args.out)
    print(f"imputed {args.infile} -> {args.out} ({args.method})")
    return 0


def cmd_eval_impute(args) -> int:
    schema = default_schema()
    table = _load_table(args.infile, schema)
    report = evaluate_imputation(
        table,
        features=args.features.split(","),
        rate=args.rate,
        methods=args.methods.split(",") if args.methods else None,
        classifiers=args.classifiers.split(",") if args.classifiers else None,
        seed=args.seed,
        gain_config=GainConfig(epochs=args.epochs),
    )
    _write_json(args.out, report.to_dict())
    print(report.format_text())
    return 0


def cmd_augment(args) -> int:
    schema = default_schema()
    table = _load_table(args.infile, schema)
    plan = load_plan(args.plan, schema) if args.plan else None
    result = two_stage_augment(
        table,
        plan=plan,
        smote_config=SmotencConfig(),
        cgan_config=CganConfig(epochs=args.epochs),
        seed=args.seed,
    )
    save_csv(result.table, args.out, origins=list(result.origins))
    print(f"augmented {len(table)} -> {len(result.table)} rows at {args.out}")
    return 0


def _train_and_report(table, seed, test_fraction, model="rf"):
    schema = table.schema
    train, test = split_stratified(table, test_fraction, derive_seed(seed, "split"))
    feature_names = tuple(a.name for a in schema.features)
    codec = build_codec(train, attributes=feature_names)
    X_train = encode(train, codec_source=codec).values
    X_test = encode(test, codec_source=codec).values
    y_train, y_test = label_indices(train), label_indices(test)
    classes = schema.class_codes
    if model == "rf":
        forest = train_forest(
            X_train, y_train, ForestConfig(n_classes=len(classes)),
            seed=derive_seed(seed, "rf"), codec=codec,
        )
        fitted = forest
    else:
        fitted = CLASSIFIERS[model](X_train, y_train, len(classes), derive_seed(seed, model))
    proba = fitted.predict_proba(X_test)
    predicted = [classes[i] for i in np.argmax(proba, axis=1)]
    truth = [classes[i] for i in y_test]
    metrics = compute_metrics(predicted, proba, truth, classes)
    importance = None
    if model == "rf":
        importance = sorted(feature_importance(fitted), key=lambda kv: -kv[1])
    return metrics, importance


def cmd_train(args) -> int:
    schema = default_schema()
    table = _load_table(args.infile, schema)
    if args.folds:
        from .table import kfold_stratified

        classes = schema.class_codes
        feature_names = tuple(a.name for a in schema.features)
        fold_docs = []
        for f, (train, test) in enumerate(kfold_stratified(table, args.folds, derive_seed(args.seed, "folds"))):
            codec = build_codec(train, attributes=feature_names)
            X_train = encode(train, codec_source=codec).values
            X_test = encode(test, codec_source=codec).values
            model = (
                train_forest(X_train, label_indices(train), ForestConfig(n_classes=len(classes)),
                             seed=derive_seed(args.seed, f"rf-fold-{f}"), codec=codec)
                if args.model == "rf"
                else CLASSIFIERS[args.model](X_train, label_indices(train), len(classes),
                                             derive_seed(args.seed, f"{args.model}-fold-{f}"))
            )
            proba = model.predict_proba(X_test)
            predicted = [classes[i] for i in np.argmax(proba, axis=1)]
            truth = [classes[i] for i in label_indices(test)]
            fold_docs.append(compute_metrics(predicted, proba, truth, classes).to_dict())
        summary = {
            "folds": fold_docs,
            "mean_accuracy": float(np.mean([d["accuracy"] for d in fold_docs])),
            "mean_macro_auc": float(np.mean([d["macro_auc"] for d in fold_docs])),
        }
        _write_json(args.report, summary)
        if args.importance:
            raise DataError("--importance is a single-split report; drop --folds")
        print(f"{args.folds}-fold accuracy {summary['mean_accuracy']:.4f}  "
              f"macro AUC {summary['mean_macro_auc']:.4f}")
        return 0
    metrics, importance = _train_and_report(table, args.seed, args.test_fraction, args.model)
    _write_json(args.report, metrics.to_dict())
    if args.importance:
        if importance is None:
            raise DataError("--importance requires --model rf")
        _write_json(args.importance, {"importance": [[a, w] for a, w in importance]})
    print(f"accuracy {metrics.accuracy:.4f}  macro AUC {metrics.macro_auc:.4f}")
    return 0


def cmd_importance(args) -> int:
    schema = default_schema()
    table = _load_table(args.infile, schema)
    _, importance = _train_and_report(table, args.seed, args.test_fraction, "rf")
    _write_json(args.out, {"importance": [[a, w] for a, w in importance]})
    print("\n".join(f"{a:<12} {w:.4f}" for a, w in importance))
    return 0


def cmd_correlate(args) -> int:
    schema = default_schema()
    table = _load_table(args.infile, schema)
    attrs = args.attrs.split(",") if args.attrs else None
    matrix = correlation_matrix(table, attrs)
    _write_json(args.out, matrix.to_dict())
    print(f"wrote {len(matrix.attributes)}x{len(matrix.attributes)} correlation matrix to {args.out}")
    return 0


def _stats_payload(table, attrs):
    classes = [str(c) for c in table.schema.class_codes]
    panels = []
    for attr in attrs:
        grouped = group_by_class(table, attr)
        box = {}
        violin = {}
        for cls, values in grouped.items():
            if not values:
                raise DataError(f"class {cls!r} has no values for attribute {attr!r}")
            box[str(cls)] = box_stats(values).to_dict()
            violin[str(cls)] = kde(values).to_dict()
        panels.append({"attribute": attr, "box": box, "violin": violin})
    return {"classes": classes, "panels": panels}


def cmd_stats(args) -> int:
    schema = default_schema()
    table = _load_table(args.infile, schema)
    attrs = args.attrs.split(",")
    _write_json(args.out, _stats_payload(table, attrs))
    print(f"wrote box/violin statistics for {len(attrs)} attribute(s) to {args.out}")
    return 0


def _panels_from_payload(payload, key):
    from .analyze import BoxStats, ViolinStats

    classes = payload["classes"]
    panels = []
    for panel in payload["panels"]:
        per_class = {}
        for cls in classes:
            doc = panel[key][cls]
            if key == "box":
                per_class[cls] = BoxStats(
                    q1=doc["q1"], median=doc["median"], q3=doc["q3"],
                    whisker_low=doc["whisker_low"], whisker_high=doc["whisker_high"],
                    outliers=tuple(doc["outliers"]),
                )
            else:
                per_class[cls] = ViolinStats(
                    grid=tuple(doc["grid"]), density=tuple(doc["density"]),
                    q1=doc["q1"], median=doc["median"], q3=doc["q3"],
                    min=doc["min"], max=doc["max"],
                )
        panels.append((panel["attribute"], per_class))
    return classes, panels


def cmd_plot(args) -> int:
    payload = _read_json(args.infile)
    if args.kind == "importance":
        doc = render_importance_bar(
            [(a, w) for a, w in payload["importance"]],
            PlotSpec(kind="importance_bar", title=args.title or "Feature importance"),
        )
    elif args.kind == "box":
        classes, panels = _panels_from_payload(payload, "box")
        doc = render_box_grid(
            panels, classes,
            PlotSpec(kind="box_grid", title=args.title or "Per-class distributions", width=900, height=560),
        )
    elif args.kind == "violin":
        classes, panels = _panels_from_payload(payload, "violin")
        doc = render_violin_grid(
            panels, classes,
            PlotSpec(kind="violin_grid", title=args.title or "Per-class densities", width=900, height=560),
        )
    elif args.kind == "heatmap":
        matrix = CorrelationMatrix(
            tuple(payload["attributes"]),
            np.array(payload["matrix_full_precision"], dtype=np.float64),
        )
        doc = render_heatmap(matrix, PlotSpec(kind="heatmap", title=args.title or "Attribute correlation",
                                              width=640, height=560))
    else:
        raise DataError(f"unknown plot kind {args.kind!r}")
    Path(args.out).write_text(doc, encoding="utf-8")
    print(f"wrote {args.kind} figure to {args.out}")
    return 0


# -- pipeline ---------------------------------------------------------------------


@dataclass
class PipelineConfig:
    out_dir: str = "out"
    seed: int = 7
    n_rows: int = 1087
    bench_rows: int = 520
    features: tuple[str, ...] = ("hairstyle", "headgear", "weapon", "height")
    rate: float = 0.3
    methods: tuple[str, ...] = ("sta", "mice", "gain")
    classifiers: tuple[str, ...] = ("lr", "dt", "rf", "mlp", "svm")
    test_fraction: float = 0.2
    total: int = 1800
    smote_cap: int = 130
    gain_epochs: int = 1200
    gain_alpha: float = 300.0
    gain_hidden: tuple[int, int] = (16, 16)
    cgan_epochs: int = 250
    box_panels: int = 6
    stages: tuple[str, ...] = ("synth", "eval_impute", "augment", "train", "analyze", "plot")

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        doc = _read_json(path)
        config = cls()
        for key, value in doc.items():
            if not hasattr(config, key):
                raise DataError(f"unknown pipeline config key {key!r}")
            if isinstance(getattr(config, key), tuple):
                value = tuple(value)
            setattr(config, key, value)
        return config


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def cmd_pipeline(args) -> int:
    config = PipelineConfig.from_file(args.config) if args.config else PipelineConfig()
    if args.out:
        config.out_dir = args.out
    if args.seed is not None:
        config.seed = args.seed
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "reports").mkdir(exist_ok=True)
    schema = default_schema()
    seed = config.seed
    artifacts: list[Path] = []
    completed: list[str] = []
    manifest_path = out / "manifest.json"

    def finish(status: int) -> int:
        manifest = {
            "seed": seed,
            "stages_completed": completed,
            "artifacts": [
                {"path": str(p.relative_to(out)), "sha256": _sha256(p)} for p in artifacts
            ],
        }
        _write_json(manifest_path, manifest)
        return status

    try:
        spec = default_synthesis_spec()
        corpus_path = out / "tw.csv"
        if "synth" in config.stages:
            corpus = synthesize_corpus(spec, config.n_rows, derive_seed(seed, "synth"), schema)
            save_csv(corpus, corpus_path)
            artifacts.append(corpus_path)
            completed.append("synth")
        else:
            corpus = _load_table(corpus_path, schema)

        if "eval_impute" in config.stages:
            bench = synthesize_corpus(spec, config.bench_rows, derive_seed(seed, "bench"), schema)
            report = evaluate_imputation(
                bench,
                features=list(config.features),
                rate=config.rate,
                methods=list(config.methods),
                classifiers=list(config.classifiers),
                seed=derive_seed(seed, "eval-impute"),
                gain_config=GainConfig(
                    epochs=config.gain_epochs, alpha=config.gain_alpha,
                    hidden=tuple(config.gain_hidden),
                ),
            )
            path = out / "reports" / "imputation.json"
            _write_json(path, report.to_dict())
            artifacts.append(path)
            completed.append("eval_impute")

        train_real, test_real = split_stratified(
            corpus, config.test_fraction, derive_seed(seed, "split")
        )
        augmented_train = train_real
        if "augment" in config.stages:
            counts = class_histogram(corpus)
            plan = default_augment_plan(counts, schema.class_codes, config.total, config.smote_cap)
            result = two_stage_augment(
                corpus, plan, SmotencConfig(), CganConfig(epochs=config.cgan_epochs),
                seed=derive_seed(seed, "augment"),
            )
            tws_path = out / "tws.csv"
            save_csv(result.table, tws_path, origins=list(result.origins))
            artifacts.append(tws_path)
            completed.append("augment")
            # the metrics protocol augments only the training split, so the
            # held-out real rows never appear in any training set
            train_counts = class_histogram(train_real)
            train_plan = default_augment_plan(
                train_counts, schema.class_codes, config.total, config.smote_cap
            )
            augmented_train = two_stage_augment(
                train_real, train_plan, SmotencConfig(), CganConfig(epochs=config.cgan_epochs),
                seed=derive_seed(seed, "augment-train"),
            ).table

        importance = None
        if "train" in config.stages:
            feature_names = tuple(a.name for a in schema.features)
            classes = schema.class_codes
            reports = {}
            for name, train_table in (("before", train_real), ("after", augmented_train)):
                codec = build_codec(train_table, attributes=feature_names)
                X_train = encode(train_table, codec_source=codec).values
                X_test = encode(test_real, codec_source=codec).values
                forest = train_forest(
                    X_train, label_indices(train_table),
                    ForestConfig(n_classes=len(classes)),
                    seed=derive_seed(seed, f"rf-{name}"), codec=codec,
                )
                proba = forest.predict_proba(X_test)
                predicted = [classes[i] for i in np.argmax(proba, axis=1)]
                truth = [classes[i] for i in label_indices(test_real)]
                reports[name] = compute_metrics(predicted, proba, truth, classes).to_dict()
                if name == "after":
                    importance = sorted(feature_importance(forest), key=lambda kv: -kv[1])
            path = out / "reports" / "classification.json"
            _write_json(
                path,
                {
                    "before": reports.get("before"),
                    "after": reports.get("after"),
                    "importance": [[a, w] for a, w in (importance or [])],
                },
            )
            artifacts.append(path)
            completed.append("train")

        analysis = None
        if "analyze" in config.stages:
            target = augmented_train if "augment" in config.stages else corpus
            matrix = correlation_matrix(target)
            ranked = [a for a, _ in (importance or [])] or [a.name for a in schema.features]
            box_attrs = ranked[: config.box_panels]
            violin_attrs = ranked[config.box_panels :] or ranked[-4:]
            analysis = {
                "correlation": matrix.to_dict(),
                "box": _stats_payload(target, box_attrs),
                "violin": _stats_payload(target, violin_attrs),
            }
            path = out / "reports" / "analysis.json"
            _write_json(path, analysis)
            artifacts.append(path)
            completed.append("analyze")

        if "plot" in config.stages and analysis is not None and importance is not None:
            figures = {
                "importance.svg": render_importance_bar(
                    importance, PlotSpec(kind="importance_bar", title="Feature importance")
                ),
                "box.svg": render_box_grid(
                    _panels_from_payload(analysis["box"], "box")[1],
                    analysis["box"]["classes"],
                    PlotSpec(kind="box_grid", title="Key attribute distributions", width=900, height=560),
                ),
                "violin.svg": render_violin_grid(
                    _panels_from_payload(analysis["violin"], "violin")[1],
                    analysis["violin"]["classes"],
                    PlotSpec(kind="violin_grid", title="Attribute densities", width=900, height=560),
                ),
                "heatmap.svg": render_heatmap(
                    CorrelationMatrix(
                        tuple(analysis["correlation"]["attributes"]),
                        np.array(analysis["correlation"]["matrix_full_precision"]),
                    ),
                    PlotSpec(kind="heatmap", title="Attribute correlation", width=640, height=560),
                ),
            }
            for name, doc in figures.items():
                path = out / name
                path.write_text(doc, encoding="utf-8")
                artifacts.append(path)
            completed.append("plot")
    except TwkitError as exc:
        print(f"pipeline failed after {completed}: {exc}", file=sys.stderr)
        return finish(1)

    status = finish(0)
    print(f"pipeline complete; manifest at {manifest_path}")
    return status


# -- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twkit", description=__doc__)
    parser.add_argument("--version", action="version", version=f"twkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic corpus CSV")
    p.add_argument("--n", type=int, default=1087)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--spec", help="synthesis spec JSON (defaults to the built-in spec)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("impute", help="fill missing cells in a CSV")
    p.add_argument("--method", choices=["sta", "mice", "gain"], required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rounds", type=int, default=10, help="MICE sweeps")
    p.add_argument("--epochs", type=int, default=400, help="GAIN training epochs")
    p.set_defaults(func=cmd_impute)

    p = sub.add_parser("eval-impute", help="benchmark imputation methods by metric deltas")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--features", default="hairstyle,headgear,weapon,height")
    p.add_argument("--rate", type=float, default=0.3)
    p.add_argument("--methods", default=None)
    p.add_argument("--classifiers", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=400)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval_impute)

    p = sub.add_parser("augment", help="two-stage minority-class augmentation")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--plan", help="plan JSON (defaults to the built-in 1800-row plan)")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=300, help="CGAN training epochs")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("train", help="train a classifier and write metrics JSON")
    p.add_argument("--model", choices=sorted(CLASSIFIERS), default="rf")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--importance", help="also write importance JSON (rf only)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.add_argument("--folds", type=int, default=0, help="stratified k-fold CV instead of one split")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("importance", help="random-forest attribute importance")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.set_defaults(func=cmd_importance)

    p = sub.add_parser("correlate", help="pairwise categorical correlation matrix")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--attrs", default=None, help="comma list (default: categorical features)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("stats", help="per-class box and violin statistics")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--attrs", required=True, help="comma list of attributes")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("plot", help="render a figure from an analysis JSON")
    p.add_argument("--kind", choices=["importance", "box", "violin", "heatmap"], required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--title", default=None)
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("pipeline", help="run every stage and write a manifest")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--config", default=None, help="pipeline config JSON")
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except TwkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
