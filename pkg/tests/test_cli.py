import json
import xml.etree.ElementTree as ET

import pytest

from twkit.cli import main
from twkit.schema import default_schema
from twkit.table import class_histogram, load_augmented_csv, load_csv


def run(argv):
    return main([str(a) for a in argv])


def test_synth_writes_rows(tmp_path, schema):
    out = tmp_path / "tw.csv"
    assert run(["synth", "--n", 200, "--seed", 7, "--out", out]) == 0
    table = load_csv(out, schema)
    assert len(table) == 200


def test_synth_with_spec_file(tmp_path, schema):
    from twkit.synth import default_synthesis_spec, save_spec

    spec_path = tmp_path / "spec.json"
    save_spec(default_synthesis_spec(), spec_path)
    out_a = tmp_path / "a.csv"
    out_b = tmp_path / "b.csv"
    assert run(["synth", "--n", 50, "--seed", 3, "--out", out_a]) == 0
    assert run(["synth", "--n", 50, "--seed", 3, "--spec", spec_path, "--out", out_b]) == 0
    assert out_a.read_text() == out_b.read_text()


def test_impute_sta_round_trip(tmp_path, schema, corpus_200):
    from twkit.table import inject_missing, save_csv

    injected, _ = inject_missing(corpus_200, ["headgear"], 0.3, seed=1)
    src = tmp_path / "missing.csv"
    save_csv(injected, src)
    out = tmp_path / "fixed.csv"
    assert run(["impute", "--method", "sta", "--in", src, "--out", out]) == 0
    table = load_csv(out, schema)
    assert table.is_complete()


def test_impute_complete_passthrough(tmp_path, schema, corpus_200):
    from twkit.table import save_csv

    src = tmp_path / "full.csv"
    save_csv(corpus_200, src)
    out = tmp_path / "out.csv"
    assert run(["impute", "--method", "gain", "--in", src, "--out", out, "--epochs", "5"]) == 0
    table = load_csv(out, schema)
    assert table.rows == corpus_200.rows


def test_missing_file_is_data_error(tmp_path):
    code = run(["impute", "--method", "sta", "--in", tmp_path / "nope.csv", "--out", tmp_path / "x.csv"])
    assert code == 1


def test_usage_error_exit_2():
    with pytest.raises(SystemExit) as exc:
        run(["impute", "--method", "bogus", "--in", "x", "--out", "y"])
    assert exc.value.code == 2


def test_augment_train_correlate_stats_plot_chain(tmp_path, schema):
    from twkit import default_synthesis_spec, synthesize_corpus
    from twkit.table import save_csv

    corpus = synthesize_corpus(default_synthesis_spec(), 400, seed=8)
    src = tmp_path / "tw.csv"
    save_csv(corpus, src)

    # augment with an explicit small plan
    from twkit.augment import default_augment_plan

    counts = class_histogram(corpus)
    plan = default_augment_plan(counts, schema.class_codes, total=600, smote_cap=50)
    plan_path = tmp_path / "plan.json"
    plan_path.write_text(json.dumps(plan.to_dict()), encoding="utf-8")
    tws = tmp_path / "tws.csv"
    assert run(["augment", "--in", src, "--plan", plan_path, "--out", tws,
                "--seed", 3, "--epochs", 20]) == 0
    augmented, origins = load_augmented_csv(tws, schema)
    assert len(augmented) == 600
    assert origins is not None and origins[0] == "real"

    report = tmp_path / "metrics.json"
    importance = tmp_path / "importance.json"
    assert run(["train", "--model", "rf", "--in", tws, "--report", report,
                "--importance", importance, "--seed", 5]) == 0
    metrics = json.loads(report.read_text())
    assert 0.0 <= metrics["accuracy"] <= 1.0
    imp = json.loads(importance.read_text())["importance"]
    assert abs(sum(w for _, w in imp) - 1.0) < 1e-9

    corr = tmp_path / "corr.json"
    assert run(["correlate", "--in", tws, "--out", corr]) == 0
    doc = json.loads(corr.read_text())
    assert len(doc["attributes"]) == 9

    stats = tmp_path / "stats.json"
    assert run(["stats", "--in", tws, "--attrs", "headgear,height", "--out", stats]) == 0
    stats_doc = json.loads(stats.read_text())
    assert len(stats_doc["panels"]) == 2

    for kind, payload in (("importance", importance), ("box", stats), ("violin", stats), ("heatmap", corr)):
        fig = tmp_path / f"{kind}.svg"
        assert run(["plot", "--kind", kind, "--in", payload, "--out", fig]) == 0
        root = ET.fromstring(fig.read_text())
        assert root.tag.endswith("svg")


def test_heatmap_cell_texts_match_json(tmp_path, schema):
    from twkit import default_synthesis_spec, synthesize_corpus
    from twkit.table import save_csv

    corpus = synthesize_corpus(default_synthesis_spec(), 300, seed=19)
    src = tmp_path / "tw.csv"
    save_csv(corpus, src)
    corr = tmp_path / "corr.json"
    run(["correlate", "--in", src, "--out", corr])
    fig = tmp_path / "heat.svg"
    run(["plot", "--kind", "heatmap", "--in", corr, "--out", fig])
    doc = json.loads(corr.read_text())
    svg = fig.read_text()
    for row in doc["matrix"]:
        for value in row:
            assert f">{value:.2f}<" in svg


def test_train_with_folds(tmp_path, schema):
    from twkit import default_synthesis_spec, synthesize_corpus
    from twkit.table import save_csv

    corpus = synthesize_corpus(default_synthesis_spec(), 300, seed=19)
    src = tmp_path / "tw.csv"
    save_csv(corpus, src)
    report = tmp_path / "cv.json"
    assert run(["train", "--model", "dt", "--in", src, "--report", report,
                "--folds", 3, "--seed", 2]) == 0
    doc = json.loads(report.read_text())
    assert len(doc["folds"]) == 3
    assert 0.0 <= doc["mean_accuracy"] <= 1.0


def test_pipeline_failure_writes_partial_manifest(tmp_path):
    # an unknown injected feature fails the eval stage after synth completed
    config = tmp_path / "config.json"
    config.write_text(json.dumps({
        "n_rows": 60, "bench_rows": 60, "features": ["no_such_attribute"],
        "stages": ["synth", "eval_impute"],
    }), encoding="utf-8")
    out = tmp_path / "out"
    code = run(["pipeline", "--out", out, "--seed", 3, "--config", config])
    assert code == 1
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["stages_completed"] == ["synth"]
    assert [a["path"] for a in manifest["artifacts"]] == ["tw.csv"]


def test_pipeline_config_rejects_unknown_keys(tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"not_a_real_knob": 1}), encoding="utf-8")
    code = run(["pipeline", "--out", tmp_path / "out", "--seed", 3, "--config", config])
    assert code == 1
