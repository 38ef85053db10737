import json

import pytest

from plsum.cli import main
from plsum.corpus_io import (
    file_digest,
    read_masked,
    read_pairs,
    read_predictions,
)


def _run(*argv):
    return main([str(a) for a in argv])


def _manifest(out_path):
    return json.loads((out_path.parent / (out_path.name + ".manifest.json")).read_text())


@pytest.fixture()
def notes_file(tmp_path):
    out = tmp_path / "notes.jsonl"
    assert _run("synth", "--n-notes", 20, "--seed", 3, "--out", out) == 0
    return out


def test_synth_writes_notes_and_manifest(notes_file):
    manifest = _manifest(notes_file)
    assert manifest["command"] == "synth"
    assert manifest["counts"] == {"notes": 20}
    assert manifest["outputs"][str(notes_file)] == file_digest(notes_file)
    assert manifest["config"]["n_notes"] == 20
    assert manifest["config"]["seed"] == 3
    assert "func" not in manifest["config"]
    assert "verbose" not in manifest["config"]
    assert "lexicon" not in manifest["config"]  # None values dropped


def test_synth_is_deterministic(tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    _run("synth", "--n-notes", 10, "--seed", 1, "--out", a)
    _run("synth", "--n-notes", 10, "--seed", 1, "--out", b)
    assert file_digest(a) == file_digest(b)


def test_full_pipeline(tmp_path, notes_file):
    examples = tmp_path / "examples.jsonl"
    assert _run("parse", "--in", notes_file, "--out", examples) == 0
    assert _manifest(examples)["counts"]["skipped"] == 0

    spans = tmp_path / "spans.jsonl"
    assert _run("extract", "--in", notes_file, "--out", spans) == 0
    assert _manifest(spans)["counts"]["notes"] == 20

    plan_spans = tmp_path / "plan_spans.jsonl"
    assert _run("extract", "--in", notes_file, "--section", "assessment_plan",
                "--out", plan_spans) == 0

    pairs = tmp_path / "pairs.jsonl"
    report = tmp_path / "quality.json"
    assert _run("augment", "--in", examples, "--cap", 5, "--report", report,
                "--out", pairs) == 0
    rows = read_pairs(pairs)
    assert rows
    per_origin = {}
    for row in rows:
        per_origin.setdefault(row["origin_id"], []).append(row["variant"])
    for variants in per_origin.values():
        assert len(variants) <= 5
    quality = json.loads(report.read_text())
    assert set(quality) == {"input", "summary"}
    assert 0.0 < quality["input"]["mean_jaccard_overlap"] <= 1.0

    masked = tmp_path / "masked.jsonl"
    assert _run("mask", "--in", notes_file, "--policy", "token", "--out", masked) == 0
    m = _manifest(masked)["counts"]
    assert m["examples"] == 20
    assert 0.10 <= m["masked_tokens"] / m["total_tokens"] <= 0.20
    assert len(read_masked(masked)) == 20

    cmasked = tmp_path / "cmasked.jsonl"
    assert _run("mask", "--in", notes_file, "--policy", "concept", "--out", cmasked) == 0
    assert len(read_masked(cmasked)) == 20

    preds = tmp_path / "preds.jsonl"
    assert _run("baseline", "--in", notes_file, "--out", preds) == 0
    assert len(read_predictions(preds)) == 20

    report_json = tmp_path / "report.json"
    report_csv = tmp_path / "report.csv"
    assert _run("evaluate", "--examples", examples, "--predictions", preds,
                "--csv", report_csv, "--out", report_json) == 0
    blob = json.loads(report_json.read_text())
    assert set(blob["subgroups"]) == {"explicit", "direct", "indirect", "all"}
    assert blob["subgroups"]["all"]["n_examples"] == 20
    assert blob["matcher"] == {"metric": "jaccard", "threshold": 0.7}
    lines = report_csv.read_text().splitlines()
    assert lines[0].startswith("subgroup,n_examples,rouge_l_p")
    assert len(lines) == 5


def test_workers_do_not_change_bytes(tmp_path, notes_file):
    examples = tmp_path / "examples.jsonl"
    _run("parse", "--in", notes_file, "--out", examples)
    for cmd, extra in (
        ("augment", ["--in", examples, "--cap", 8]),
        ("mask", ["--in", notes_file, "--policy", "token"]),
        ("mask", ["--in", notes_file, "--policy", "concept"]),
        ("extract", ["--in", notes_file]),
        ("baseline", ["--in", notes_file]),
    ):
        serial = tmp_path / f"{cmd}{len(extra)}_serial.jsonl"
        parallel = tmp_path / f"{cmd}{len(extra)}_parallel.jsonl"
        assert _run(cmd, *extra, "--workers", 1, "--out", serial) == 0
        assert _run(cmd, *extra, "--workers", 4, "--out", parallel) == 0
        assert file_digest(serial) == file_digest(parallel)


def test_parse_skips_unusable_notes(tmp_path):
    src = tmp_path / "notes.jsonl"
    rows = [
        {"note_id": "good", "text": "worsening chf", "annotations": [
            {"plan_index": 1, "problem": "chf", "label": "direct"}]},
        {"note_id": "bad", "text": "Objective: hr 80", "annotations": []},
    ]
    src.write_text("".join(json.dumps(r) + "\n" for r in rows))
    out = tmp_path / "examples.jsonl"
    assert _run("parse", "--in", src, "--out", out) == 0
    manifest = _manifest(out)
    assert manifest["counts"] == {"examples": 1, "skipped": 1}


def test_baseline_flags(tmp_path):
    src = tmp_path / "notes.jsonl"
    src.write_text(json.dumps({"note_id": "n1", "text": "mi with fever"}) + "\n")
    out = tmp_path / "preds.jsonl"
    assert _run("baseline", "--in", src, "--preferred-terms", "--out", out) == 0
    assert read_predictions(out)["n1"] == "myocardial infarction; fever"

    filtered = tmp_path / "preds2.jsonl"
    assert _run("baseline", "--in", src, "--semantic-types", "T047",
                "--out", filtered) == 0
    assert read_predictions(filtered)["n1"] == "mi"


def test_config_file_supplies_defaults(tmp_path, notes_file):
    examples = tmp_path / "examples.jsonl"
    _run("parse", "--in", notes_file, "--out", examples)

    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"cap": 2}))
    out = tmp_path / "pairs.jsonl"
    assert _run("--config", cfg, "augment", "--in", examples, "--out", out) == 0
    assert all(r["variant"] < 2 for r in read_pairs(out))
    assert _manifest(out)["config"]["cap"] == 2

    # explicit flags beat config-file values
    out2 = tmp_path / "pairs2.jsonl"
    assert _run("--config", cfg, "augment", "--in", examples, "--cap", 3,
                "--out", out2) == 0
    assert any(r["variant"] == 2 for r in read_pairs(out2))


def test_error_contract_on_missing_input(tmp_path, capsys):
    code = _run("parse", "--in", tmp_path / "nope.jsonl", "--out", tmp_path / "x.jsonl")
    assert code == 2
    err = capsys.readouterr().err
    assert err.startswith("ERROR ")
    assert "FileNotFoundError" in err


def test_error_contract_on_bad_lexicon(tmp_path, capsys):
    bad = tmp_path / "lex.tsv"
    bad.write_text("not a lexicon\n")
    code = _run("synth", "--n-notes", 2, "--lexicon", bad, "--out", tmp_path / "n.jsonl")
    assert code == 2
    assert "ERROR MalformedLine" in capsys.readouterr().err


def test_error_contract_on_bad_config(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("[1, 2]")
    code = _run("--config", cfg, "synth", "--n-notes", 2, "--out", tmp_path / "n.jsonl")
    assert code == 2
    assert "ERROR SchemaViolation" in capsys.readouterr().err
