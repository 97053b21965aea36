import dataclasses
import json
import os
from pathlib import Path

import pytest

from factpipe.config import PipelineConfig
from factpipe.lexicon import Lexicon
from factpipe.pipeline import (
    Artifacts,
    MissingInputError,
    PipelineRun,
    StageError,
    _fresh,
    _report_from_json,
    _report_to_json,
    build_lexicon,
    run_pipeline,
)

DATASET_LABELS = {"SUPPORTS", "REFUTES", "NOT ENOUGH INFO"}


def read_jsonl(path):
    return [json.loads(line) for line in Path(path).read_text().splitlines()]


def test_run_produces_all_artifacts(pipeline_workspace):
    cfg, _ = pipeline_workspace
    art = Artifacts(cfg.work_dir)
    expected = [art.store_file, art.retrieved, art.selected, art.rte_model,
                art.predictions, art.metrics, art.report, art.log]
    expected += art.ranker_paths(cfg.ranker_seeds())
    for path in expected:
        assert path.exists(), path


def test_report_shape_and_bounds(pipeline_workspace):
    cfg, report = pipeline_workspace
    assert report.counts["claims"] == 12
    assert report.counts["verifiable_claims"] == 8
    # gold pages/lines are easy to find on this corpus
    assert report.doc_accuracy == 1.0
    assert report.sentence_recall == 1.0
    assert 0.0 <= report.fever_score <= report.label_accuracy <= 1.0


def test_retrieved_records_keyed_by_claim_id(pipeline_workspace):
    cfg, _ = pipeline_workspace
    records = read_jsonl(Artifacts(cfg.work_dir).retrieved)
    assert sorted(rec["id"] for rec in records) == list(range(1000, 1012))
    for rec in records:
        assert len(rec["pages"]) == len(set(rec["pages"]))


def test_selected_records_are_scored_top5(pipeline_workspace):
    cfg, _ = pipeline_workspace
    records = read_jsonl(Artifacts(cfg.work_dir).selected)
    assert sorted(rec["id"] for rec in records) == list(range(1000, 1012))
    for rec in records:
        rows = rec["sentences"]
        assert len(rows) <= 5
        scores = [score for _, _, score in rows]
        assert scores == sorted(scores, reverse=True)


def test_prediction_records_use_dataset_label_strings(pipeline_workspace):
    cfg, _ = pipeline_workspace
    records = read_jsonl(Artifacts(cfg.work_dir).predictions)
    assert sorted(rec["id"] for rec in records) == list(range(1000, 1012))
    for rec in records:
        assert rec["label"] in DATASET_LABELS
        assert len(rec["evidence"]) <= 5


def test_metrics_file_records_configured_sentence_count(pipeline_workspace):
    cfg, report = pipeline_workspace
    payload = json.loads(Artifacts(cfg.work_dir).metrics.read_text())
    assert payload["config"]["sentences"] == cfg.sentences
    assert payload["config"]["k"] == cfg.k
    assert payload["metrics"]["fever_score"] == report.fever_score
    assert payload["metrics"]["label_accuracy"] == report.label_accuracy


def test_rerun_skips_stages_and_returns_same_report(pipeline_workspace):
    cfg, report = pipeline_workspace
    art = Artifacts(cfg.work_dir)
    watched = [art.retrieved, art.selected, art.predictions, art.rte_model]
    before = [p.stat().st_mtime_ns for p in watched]
    again = run_pipeline(cfg)
    assert [p.stat().st_mtime_ns for p in watched] == before
    assert again == report


def test_force_rewrites_but_preserves_bytes(pipeline_workspace):
    cfg, _ = pipeline_workspace
    art = Artifacts(cfg.work_dir)
    before_bytes = art.retrieved.read_bytes()
    before_mtime = art.retrieved.stat().st_mtime_ns
    PipelineRun(cfg, force=True).retrieve()
    assert art.retrieved.stat().st_mtime_ns > before_mtime
    assert art.retrieved.read_bytes() == before_bytes


def test_standalone_evaluate_reloads_stored_metrics(pipeline_workspace):
    cfg, report = pipeline_workspace
    restored = PipelineRun(cfg).run_stage("evaluate")
    assert restored == report


def test_missing_claims_file_names_path(pipeline_workspace, tmp_path):
    cfg, _ = pipeline_workspace
    bad = dataclasses.replace(cfg, claims=str(tmp_path / "gone.jsonl"),
                              work_dir=str(tmp_path / "run"))
    with pytest.raises(MissingInputError, match="gone.jsonl"):
        run_pipeline(bad)


def test_stage_failure_is_tagged_with_stage_name(pipeline_workspace, tmp_path):
    cfg, _ = pipeline_workspace
    bad_claims = tmp_path / "claims.jsonl"
    bad_claims.write_text("this is not json\n")
    bad = dataclasses.replace(cfg, claims=str(bad_claims),
                              work_dir=str(tmp_path / "run"))
    with pytest.raises(StageError, match="stage retrieve failed") as info:
        run_pipeline(bad)
    assert info.value.stage == "retrieve"


def test_fresh_rules(tmp_path):
    output = tmp_path / "out.txt"
    newer = tmp_path / "in.txt"
    assert not _fresh(output, [])          # no output yet
    output.write_text("x")
    assert _fresh(output, [])
    newer.write_text("y")
    os.utime(newer, ns=(4 * 10**18,) * 2)  # far future
    assert not _fresh(output, [newer])
    os.utime(output, ns=(4 * 10**18 + 1,) * 2)
    assert _fresh(output, [newer])
    assert not _fresh(output, [tmp_path / "never-made.txt"])


def test_report_json_round_trip(pipeline_workspace):
    cfg, report = pipeline_workspace
    restored = _report_from_json(json.loads(_report_to_json(report, cfg)))
    assert restored == report


def test_build_lexicon_synthetic_dims():
    lex = build_lexicon(PipelineConfig(glove_dim=6, fasttext_dim=10))
    assert lex.dim == 16


def test_build_lexicon_from_vector_files(tmp_path):
    glove = tmp_path / "g.txt"
    glove.write_text("apple 1.0 2.0\npear 3.0 4.0\n")
    fasttext = tmp_path / "f.txt"
    fasttext.write_text("apple 9.0\npear 8.0\n")
    cfg = PipelineConfig(glove=str(glove), fasttext=str(fasttext),
                         glove_dim=2, fasttext_dim=1)
    lex = build_lexicon(cfg)
    assert lex.dim == 3
    assert list(lex.embed_token("apple")) == [1.0, 2.0, 9.0]


def test_unknown_stage_rejected(pipeline_workspace):
    cfg, _ = pipeline_workspace
    with pytest.raises(ValueError, match="unknown stage"):
        PipelineRun(cfg).run_stage("deploy")
