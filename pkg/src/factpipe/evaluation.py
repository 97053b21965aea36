"""Verification metrics over claim predictions, plus a brute-force twin scorer.

Document accuracy and sentence recall are computed over Supported/Refuted
claims only — NotEnoughInfo claims have no gold evidence, so they are
excluded from both numerator and denominator (stated in the report
header).  Label accuracy covers every claim.  The headline score gives a
point only when the label is right and, for verifiable claims, some gold
evidence set is fully inside the first five predicted sentences.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .corpus import Label

log = logging.getLogger(__name__)

EVIDENCE_CAP = 5


@dataclass
class PredictionRecord:
    claim_id: int
    predicted_pages: set = field(default_factory=set)
    predicted_evidence: list = field(default_factory=list)  # ordered (page, line)
    predicted_label: Label | None = None


@dataclass
class MetricsReport:
    doc_accuracy: float
    sentence_recall: float
    label_accuracy: float
    fever_score: float
    counts: dict
    empty_input: bool = False


def _index(preds):
    by_id = {}
    for pred in preds:
        by_id[pred.claim_id] = pred  # later record wins
    return by_id


def _evidence_pairs(pred, cap=None):
    pairs = [tuple(e) for e in pred.predicted_evidence]
    return pairs if cap is None else pairs[:cap]


def _doc_hit(pred, claim):
    if pred is None or not claim.evidence_sets:
        return False
    pages = set(pred.predicted_pages or ())
    return any({page for page, _ in ev_set} <= pages
               for ev_set in claim.evidence_sets)


def _sentence_hit(pred, claim, cap=None):
    if pred is None or not claim.evidence_sets:
        return False
    covered = set(_evidence_pairs(pred, cap))
    return any(ev_set <= covered for ev_set in claim.evidence_sets)


def _label_hit(pred, claim):
    return (pred is not None and pred.predicted_label is not None
            and claim.label is not None
            and pred.predicted_label == claim.label)


def _fever_point(pred, claim):
    if not _label_hit(pred, claim):
        return False
    if claim.label is Label.NOT_ENOUGH_INFO:
        return True
    return _sentence_hit(pred, claim, cap=EVIDENCE_CAP)


def _verifiable(claims):
    return [c for c in claims if c.verifiable]


def doc_accuracy(preds, gold_claims):
    """Fraction of Supported/Refuted claims whose gold pages were all retrieved.

    A claim counts as a hit when the page set of at least one gold
    evidence set is a subset of the predicted pages.
    """
    claims = _verifiable(gold_claims)
    if not claims:
        return 0.0
    by_id = _index(preds)
    return sum(_doc_hit(by_id.get(c.id), c) for c in claims) / len(claims)


def sentence_recall(preds, gold_claims):
    """Fraction of Supported/Refuted claims with some gold set fully predicted.

    Gold sets are all-or-nothing: predicting part of a set scores
    nothing.  No length cap is applied here (the headline score applies
    its own five-sentence cap).
    """
    claims = _verifiable(gold_claims)
    if not claims:
        return 0.0
    by_id = _index(preds)
    return sum(_sentence_hit(by_id.get(c.id), c) for c in claims) / len(claims)


def label_accuracy(preds, gold_claims):
    """Fraction of all claims (NotEnoughInfo included) with the right label."""
    if not gold_claims:
        return 0.0
    by_id = _index(preds)
    return sum(_label_hit(by_id.get(c.id), c) for c in gold_claims) / len(gold_claims)


def fever_score(preds, gold_claims):
    """Label must be right; verifiable claims also need a covered gold set.

    Only the first five predicted evidence pairs count — the cap is
    enforced here, never trusted from the input.
    """
    if not gold_claims:
        return 0.0
    by_id = _index(preds)
    return sum(_fever_point(by_id.get(c.id), c) for c in gold_claims) / len(gold_claims)


def oracle_fever(preds, gold_claims):
    """Brute-force reference for ``fever_score`` (tests only).

    Same definition, structurally independent implementation: plain
    nested loops with no set algebra, so a bug in one scorer cannot hide
    in the other.
    """
    if not gold_claims:
        return 0.0
    points = 0
    for claim in gold_claims:
        pred = None
        for candidate in preds:       # linear scan; later record wins
            if candidate.claim_id == claim.id:
                pred = candidate
        if pred is None or pred.predicted_label is None or claim.label is None:
            continue
        if pred.predicted_label != claim.label:
            continue
        if claim.label is Label.NOT_ENOUGH_INFO:
            points += 1
            continue
        capped = []
        for entry in pred.predicted_evidence:
            if len(capped) == EVIDENCE_CAP:
                break
            capped.append((entry[0], entry[1]))
        for ev_set in claim.evidence_sets:
            all_found = True
            for page, line in ev_set:
                found = False
                for got_page, got_line in capped:
                    if got_page == page and got_line == line:
                        found = True
                if not found:
                    all_found = False
            if all_found:
                points += 1
                break
    return points / len(gold_claims)


def evaluate_predictions(preds, gold_claims):
    """All four metrics plus hit counts and a gold->predicted label table."""
    by_id = _index(preds)
    verifiable = _verifiable(gold_claims)
    counts = {
        "claims": len(gold_claims),
        "verifiable_claims": len(verifiable),
        "doc_hits": sum(_doc_hit(by_id.get(c.id), c) for c in verifiable),
        "sentence_hits": sum(_sentence_hit(by_id.get(c.id), c) for c in verifiable),
        "label_hits": sum(_label_hit(by_id.get(c.id), c) for c in gold_claims),
        "fever_points": sum(_fever_point(by_id.get(c.id), c) for c in gold_claims),
        "missing_predictions": sum(c.id not in by_id for c in gold_claims),
        "confusion": _confusion(by_id, gold_claims),
    }
    return MetricsReport(
        doc_accuracy=doc_accuracy(preds, gold_claims),
        sentence_recall=sentence_recall(preds, gold_claims),
        label_accuracy=label_accuracy(preds, gold_claims),
        fever_score=fever_score(preds, gold_claims),
        counts=counts,
        empty_input=not gold_claims,
    )


def _confusion(by_id, gold_claims):
    table = {}
    for claim in gold_claims:
        pred = by_id.get(claim.id)
        gold = claim.label.value if claim.label else "(unlabeled)"
        got = (pred.predicted_label.value
               if pred is not None and pred.predicted_label else "(none)")
        table[(gold, got)] = table.get((gold, got), 0) + 1
    return table


def format_report(report):
    """Fixed-layout text report; percentages to two decimals."""
    lines = [
        "verification metrics "
        "(NotEnoughInfo excluded from document accuracy and sentence recall)",
    ]
    if report.empty_input:
        lines.append("  [empty input: no gold claims]")
    c = report.counts
    rows = [
        ("document accuracy", report.doc_accuracy,
         f"{c['doc_hits']}/{c['verifiable_claims']} verifiable claims"),
        ("sentence recall", report.sentence_recall,
         f"{c['sentence_hits']}/{c['verifiable_claims']} verifiable claims"),
        ("label accuracy", report.label_accuracy,
         f"{c['label_hits']}/{c['claims']} claims"),
        ("FEVER score", report.fever_score,
         f"{c['fever_points']}/{c['claims']} claims"),
    ]
    for name, value, detail in rows:
        lines.append(f"  {name:<18} {100 * value:6.2f}  ({detail})")
    if c.get("missing_predictions"):
        lines.append(f"  missing predictions: {c['missing_predictions']}")
    if c.get("confusion"):
        lines.append("label counts (gold -> predicted)")
        for (gold, got), n in sorted(c["confusion"].items()):
            lines.append(f"  {gold} -> {got}: {n}")
    return "\n".join(lines)
