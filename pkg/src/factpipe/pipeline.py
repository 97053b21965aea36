"""Staged runs: ingest -> retrieve -> rank -> select -> classify -> evaluate.

Each stage reads files, writes one output file, and can be re-run alone.
Outputs are line-delimited JSON keyed by claim id, so any stage can be
swapped for an external implementation.  A stage whose output already
exists and is newer than all of its inputs is skipped unless forced;
every artifact is byte-deterministic for a fixed config and seeds
(timestamps live only in the run log).
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

from .config import PipelineConfig, validate
from .corpus import (ingest_dump, label_from_dataset_string,
                     label_to_dataset_string, load_claims)
from .docretrieval import MediaWikiSearch, retrieve_documents
from .evaluation import (MetricsReport, PredictionRecord,
                         evaluate_predictions, format_report)
from .lexicon import Lexicon, load_embedding_table
from .rte import RteModel, RteTrainConfig, predict, train_rte
from .sentsel import (RankerModel, RankerTrainConfig, collect_sentences,
                      score_sentences, select_top5, train_ranker)

log = logging.getLogger(__name__)

STAGES = ("ingest", "retrieve", "train-ranker", "select", "train-rte",
          "classify", "evaluate")


class MissingInputError(FileNotFoundError):
    """A required input file does not exist; the message names the path."""


class StageError(RuntimeError):
    """A stage failed; carries the stage name for the exit message."""

    def __init__(self, stage, cause):
        super().__init__(f"stage {stage} failed: {cause}")
        self.stage = stage
        self.cause = cause


def _require(path, what):
    if not path or not Path(path).exists():
        raise MissingInputError(f"{what} not found: {path}")


def _fresh(output, inputs):
    """True when ``output`` exists and is at least as new as every input.

    A missing input counts as stale: freshness can't be established, so
    the stage reruns (and rebuilds the input through its own loader).
    """
    output = Path(output)
    if not output.exists():
        return False
    out_mtime = output.stat().st_mtime
    for p in inputs:
        if not p:
            continue
        p = Path(p)
        if not p.exists() or out_mtime < p.stat().st_mtime:
            return False
    return True


def _write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")


def _read_jsonl(path):
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def build_lexicon(cfg):
    """Load the two word-vector files, or fall back to synthetic vectors."""
    if cfg.glove and cfg.fasttext:
        _require(cfg.glove, "word vector file")
        _require(cfg.fasttext, "word vector file")
        return Lexicon(load_embedding_table(cfg.glove, cfg.glove_dim),
                       load_embedding_table(cfg.fasttext, cfg.fasttext_dim))
    return Lexicon.synthetic(cfg.glove_dim + cfg.fasttext_dim)


class Artifacts:
    """Fixed layout of stage outputs under the work directory."""

    def __init__(self, work_dir):
        self.work = Path(work_dir)
        self.store_dir = self.work / "store"
        self.store_file = self.store_dir / "articles.jsonl"
        self.models = self.work / "models"
        self.retrieved = self.work / "retrieved.jsonl"
        self.selected = self.work / "selected.jsonl"
        self.rte_model = self.models / "rte.fpck"
        self.predictions = self.work / "predictions.jsonl"
        self.metrics = self.work / "metrics.json"
        self.report = self.work / "report.txt"
        self.log = self.work / "pipeline.log"

    def ranker_paths(self, seeds):
        return [self.models / f"ranker-{seed}.fpck" for seed in seeds]


class PipelineRun:
    """Shared state for one configured run; stages load inputs lazily."""

    def __init__(self, cfg, force=False):
        validate(cfg)
        self.cfg = cfg
        self.force = force
        self.art = Artifacts(cfg.work_dir)
        self.art.work.mkdir(parents=True, exist_ok=True)
        self._store = None
        self._claims = None
        self._lexicon = None
        self._retrieved = None
        self._rankers = None
        self._selected = None
        self._rte = None

    # ---- lazily loaded inputs --------------------------------------------------------

    @property
    def store(self):
        if self._store is None:
            self._store = self.ingest()
        return self._store

    @property
    def claims(self):
        if self._claims is None:
            _require(self.cfg.claims, "claims file")
            self._claims = load_claims(self.cfg.claims)
        return self._claims

    @property
    def lexicon(self):
        if self._lexicon is None:
            self._lexicon = build_lexicon(self.cfg)
        return self._lexicon

    def _search_backend(self):
        if not self.cfg.remote_search:
            return None  # store-local title search
        if self.cfg.search_endpoint:
            return MediaWikiSearch(endpoint=self.cfg.search_endpoint)
        return MediaWikiSearch()

    def _skip(self, name, output, inputs):
        if not self.force and _fresh(output, inputs):
            log.info("stage %s: %s is current; skipped", name, output)
            return True
        return False

    # ---- stages ----------------------------------------------------------------------

    def ingest(self):
        """Build (or reopen) the article store from the dump."""
        _require(self.cfg.wiki, "article dump")
        store = ingest_dump(self.cfg.wiki, store_dir=self.art.store_dir,
                            force=self.force)
        self._store = store
        return store

    def retrieve(self):
        """Candidate pages per claim -> retrieved.jsonl."""
        if self._retrieved is not None:
            return self._retrieved
        inputs = [self.cfg.claims, self.art.store_file]
        if self._skip("retrieve", self.art.retrieved, inputs):
            self._retrieved = {rec["id"]: rec["pages"]
                               for rec in _read_jsonl(self.art.retrieved)}
            return self._retrieved
        backend = self._search_backend()
        pages_by_id = {}
        for claim in self.claims:
            pages_by_id[claim.id] = retrieve_documents(
                self.store, claim.text, k=self.cfg.k,
                backend=backend, claim_id=claim.id)
        _write_jsonl(self.art.retrieved,
                     [{"id": cid, "pages": pages}
                      for cid, pages in pages_by_id.items()])
        self._retrieved = pages_by_id
        return pages_by_id

    def train_ranker(self):
        """One ranking model per ensemble seed -> models/ranker-<seed>.fpck."""
        if self._rankers is not None:
            return self._rankers
        seeds = self.cfg.ranker_seeds()
        paths = self.art.ranker_paths(seeds)
        inputs = [self.cfg.claims, self.art.store_file]
        if not self.force and all(_fresh(p, inputs) for p in paths):
            log.info("stage train-ranker: %d checkpoints current; skipped",
                     len(paths))
            self._rankers = [RankerModel.load(p) for p in paths]
            return self._rankers
        self.art.models.mkdir(parents=True, exist_ok=True)
        train_cfg = RankerTrainConfig(
            hidden=self.cfg.ranker_hidden, epochs=self.cfg.ranker_epochs,
            lr=self.cfg.ranker_lr, optimizer=self.cfg.optimizer,
            negatives=self.cfg.ranker_negatives)
        models = []
        for seed, path in zip(seeds, paths):
            model = train_ranker(self.claims, self.store, self.lexicon,
                                 train_cfg, seed=seed)
            model.save(path)
            models.append(model)
        self._rankers = models
        return models

    def select(self):
        """Top-5 scored sentences per claim -> selected.jsonl."""
        if self._selected is not None:
            return self._selected
        seeds = self.cfg.ranker_seeds()
        inputs = ([self.cfg.claims, self.art.store_file, self.art.retrieved]
                  + self.art.ranker_paths(seeds))
        if self._skip("select", self.art.selected, inputs):
            self._selected = {rec["id"]: [tuple(s) for s in rec["sentences"]]
                              for rec in _read_jsonl(self.art.selected)}
            return self._selected
        retrieved = self.retrieve()
        models = self.train_ranker()
        selected = {}
        for claim in self.claims:
            candidates = collect_sentences(self.store,
                                           retrieved.get(claim.id, []))
            if candidates:
                ranked = score_sentences(models, claim, candidates,
                                         self.lexicon)[:5]
                selected[claim.id] = [(r.page_id, r.line_no, r.score)
                                      for r in ranked]
            else:
                selected[claim.id] = []
        _write_jsonl(self.art.selected,
                     [{"id": cid, "sentences": [list(s) for s in rows]}
                      for cid, rows in selected.items()])
        self._selected = selected
        return selected

    def train_rte(self):
        """The claim classifier -> models/rte.fpck."""
        if self._rte is not None:
            return self._rte
        inputs = [self.cfg.claims, self.art.store_file, self.art.selected]
        if self._skip("train-rte", self.art.rte_model, inputs):
            self._rte = RteModel.load(self.art.rte_model)
            return self._rte
        selected = self.select()
        pairs = {cid: [(page, line) for page, line, _ in rows]
                 for cid, rows in selected.items()}
        train_cfg = RteTrainConfig(
            hidden=self.cfg.rte_hidden,
            attn_dim=self.cfg.rte_attn_dim or None,
            classifier_dims=tuple(self.cfg.rte_classifier),
            sentences=self.cfg.sentences, epochs=self.cfg.rte_epochs,
            lr=self.cfg.rte_lr, optimizer=self.cfg.optimizer)
        self.art.models.mkdir(parents=True, exist_ok=True)
        model = train_rte(self.claims, pairs, self.store, self.lexicon,
                          config=train_cfg, seed=self.cfg.seed)
        model.save(self.art.rte_model)
        self._rte = model
        return model

    def classify(self):
        """Label + evidence per claim -> predictions.jsonl."""
        inputs = [self.cfg.claims, self.art.store_file, self.art.retrieved,
                  self.art.selected, self.art.rte_model]
        if self._skip("classify", self.art.predictions, inputs):
            return _read_jsonl(self.art.predictions)
        retrieved = self.retrieve()
        selected = self.select()
        model = self.train_rte()
        records = []
        for claim in self.claims:
            pairs = [(page, line)
                     for page, line, _ in selected.get(claim.id, [])]
            verdict = predict(model, claim, pairs[:self.cfg.sentences],
                              self.store, self.lexicon)
            records.append({
                "id": claim.id,
                "label": label_to_dataset_string(verdict.label),
                "evidence": [list(p) for p in pairs],
                "pages": retrieved.get(claim.id, []),
            })
        _write_jsonl(self.art.predictions, records)
        return records

    def evaluate(self):
        """Metric set over predictions.jsonl -> metrics.json and report.txt."""
        inputs = [self.cfg.claims, self.art.predictions]
        if (not self.force and _fresh(self.art.metrics, inputs)
                and _fresh(self.art.report, inputs)):
            log.info("stage evaluate: metrics are current; skipped")
            return _report_from_json(json.loads(
                self.art.metrics.read_text(encoding="utf-8")))
        records = self.classify()
        preds = [PredictionRecord(
            claim_id=rec["id"],
            predicted_pages=set(rec["pages"]),
            predicted_evidence=[tuple(e) for e in rec["evidence"]],
            predicted_label=label_from_dataset_string(rec["label"]),
        ) for rec in records]
        report = evaluate_predictions(preds, self.claims)
        self.art.metrics.write_text(_report_to_json(report, self.cfg),
                                    encoding="utf-8")
        self.art.report.write_text(format_report(report), encoding="utf-8")
        return report

    _STAGE_METHODS = {"ingest": ingest, "retrieve": retrieve,
                      "train-ranker": train_ranker, "select": select,
                      "train-rte": train_rte, "classify": classify,
                      "evaluate": evaluate}

    def run_stage(self, name):
        """Run one named stage, tagging any failure with the stage name."""
        if name not in self._STAGE_METHODS:
            raise ValueError(f"unknown stage {name!r}")
        log.info("stage %s: start", name)
        try:
            return self._STAGE_METHODS[name](self)
        except (MissingInputError, StageError):
            raise
        except Exception as exc:
            raise StageError(name, exc) from exc


def _report_to_json(report, cfg):
    counts = dict(report.counts)
    counts["confusion"] = sorted(
        [gold, predicted, n] for (gold, predicted), n
        in report.counts["confusion"].items())
    payload = {
        "config": {"k": cfg.k, "ensemble": cfg.ensemble,
                   "sentences": cfg.sentences, "seed": cfg.seed},
        "metrics": {
            "doc_accuracy": report.doc_accuracy,
            "sentence_recall": report.sentence_recall,
            "label_accuracy": report.label_accuracy,
            "fever_score": report.fever_score,
        },
        "counts": counts,
        "empty_input": report.empty_input,
    }
    return json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2) + "\n"


def _report_from_json(payload):
    counts = dict(payload["counts"])
    counts["confusion"] = {(gold, predicted): n
                           for gold, predicted, n in counts["confusion"]}
    return MetricsReport(counts=counts, empty_input=payload["empty_input"],
                         **payload["metrics"])


def run_pipeline(cfg, force=False):
    """All stages in order; returns the final MetricsReport.

    Timestamps are confined to ``work_dir/pipeline.log`` so every other
    artifact is byte-identical across reruns with the same config.
    """
    run = PipelineRun(cfg, force=force)
    handler = logging.FileHandler(run.art.log, encoding="utf-8")
    handler.setFormatter(logging.Formatter(
        "%(asctime)s %(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger("factpipe")
    root.addHandler(handler)
    old_level = root.level
    if root.level > logging.INFO or root.level == logging.NOTSET:
        root.setLevel(logging.INFO)
    try:
        report = None
        for name in STAGES:
            result = run.run_stage(name)
            if name == "evaluate":
                report = result
        return report
    finally:
        root.setLevel(old_level)
        root.removeHandler(handler)
        handler.close()
