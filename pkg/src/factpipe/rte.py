"""Three-way claim classification over up to five selected evidence sentences.

One ESIM run per (claim, sentence) pair, all runs sharing a single
parameter set.  The claim summary is the token sum of the claim's input
encodings across runs; each sentence summary is its run's token sum
("summing up the input encodings" leaves the token reduction open — we sum
over tokens and runs).  A shared one-layer perceptron projects both
summaries, their cosine becomes the run's attention weight (no
normalization across sentences), the weighted final vectors are avg+max
pooled, and a 3-layer perceptron yields logits for
Supported / Refuted / NotEnoughInfo.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .corpus import Label, NotFoundError
from .esim import (EsimConfig, encode_pair, encode_statement, init_esim,
                   stash_config, unstash_config)
from .numerics import (ParamSet, backward, concat, cosine, cross_entropy,
                       make_optimizer, stack_rows)

log = logging.getLogger(__name__)

MAX_SENTENCES = 5
LABEL_ORDER = (Label.SUPPORTED, Label.REFUTED, Label.NOT_ENOUGH_INFO)


@dataclass
class Verdict:
    label: Label
    logits: np.ndarray       # length 3, (Supported, Refuted, NotEnoughInfo)
    attention_weights: list  # one weight per sentence actually used


@dataclass
class RteTrainConfig:
    hidden: int = 100
    projection_dim: int | None = None
    dropout: float = 0.0
    attn_dim: int | None = None          # summary projection width; None -> hidden
    classifier_dims: tuple = (100, 100)
    sentences: int = 5                   # evidence sentences per claim, <= 5
    epochs: int = 30
    lr: float = 1e-3
    optimizer: str = "adam"


class RteModel:
    """Shared ESIM encoder, summary projection, and 3-way classifier."""

    def __init__(self, cfg, attn_dim=None, classifier_dims=(100, 100),
                 seed=0, params=None):
        self.cfg = cfg
        self.attn_dim = attn_dim or cfg.hidden
        self.classifier_dims = tuple(int(d) for d in classifier_dims)
        self.params = params if params is not None else self._init_params(seed)
        self.loss_history = []

    def _init_params(self, seed):
        ps = ParamSet(seed)
        init_esim(ps, self.cfg)
        two_h = self.cfg.final_dim // 4
        ps.add("attn.w", (two_h, self.attn_dim), fan=two_h)
        ps.add("attn.b", (self.attn_dim,), init="zeros")
        c1, c2 = self.classifier_dims
        pooled = 2 * self.cfg.final_dim
        ps.add("cls.w1", (pooled, c1), fan=pooled)
        ps.add("cls.b1", (c1,), init="zeros")
        ps.add("cls.w2", (c1, c2), fan=c1)
        ps.add("cls.b2", (c2,), init="zeros")
        ps.add("cls.w3", (c2, 3), fan=c2)
        ps.add("cls.b3", (3,), init="zeros")
        stash_config(ps, self.cfg, attn_dim=self.attn_dim, c1=c1, c2=c2)
        return ps

    def encode_runs(self, claim_vecs, sentence_vecs_list, train=False, rng=None):
        """One ESIM run per sentence; the claim's input encoding is shared."""
        claim_enc = encode_statement(claim_vecs, self.params, self.cfg,
                                     train=train, rng=rng)
        return [encode_pair(claim_vecs, sv, self.params, self.cfg,
                            train=train, rng=rng, claim_encoded=claim_enc)
                for sv in sentence_vecs_list]

    def save(self, path):
        self.params.save(path)

    @classmethod
    def load(cls, path):
        ps = ParamSet.load(path)
        cfg, extra = unstash_config(ps)
        return cls(cfg, attn_dim=int(extra["attn_dim"]),
                   classifier_dims=(int(extra["c1"]), int(extra["c2"])),
                   params=ps)


def summarize_statements(runs):
    """Token-sum summaries: one claim vector (summed across runs), one per sentence."""
    if not 1 <= len(runs) <= MAX_SENTENCES:
        raise ValueError(f"need 1..{MAX_SENTENCES} runs, got {len(runs)}")
    claim_total = None
    sentence_summaries = []
    for run in runs:
        token_sum = run.claim_token_encodings.sum(axis=0)
        claim_total = token_sum if claim_total is None else claim_total + token_sum
        sentence_summaries.append(run.sentence_token_encodings.sum(axis=0))
    return claim_total, sentence_summaries


def attention_weights(claim_summary, sentence_summaries, ps):
    """Cosine of the projected claim and sentence summaries, one per sentence.

    The projection is a shared single-layer tanh perceptron.  Weights lie
    in [-1, 1]; a zero-norm projected vector gets weight 0.  No
    normalization is applied across sentences.
    """
    if not sentence_summaries:
        raise ValueError("need at least one sentence summary")
    w, b = ps["attn.w"], ps["attn.b"]
    projected_claim = (claim_summary @ w + b).tanh()
    return [cosine(projected_claim, (s @ w + b).tanh())
            for s in sentence_summaries]


def classify_logits(runs, ps):
    """Length-3 logits Tensor for a set of runs, plus the attention weights."""
    claim_summary, sentence_summaries = summarize_statements(runs)
    weights = attention_weights(claim_summary, sentence_summaries, ps)
    rows = [w * run.final_hidden for w, run in zip(weights, runs)]
    stacked = stack_rows(rows)
    pooled = concat([stacked.mean(axis=0), stacked.max(axis=0)], axis=0)
    h1 = (pooled @ ps["cls.w1"] + ps["cls.b1"]).relu()
    h2 = (h1 @ ps["cls.w2"] + ps["cls.b2"]).relu()
    logits = h2 @ ps["cls.w3"] + ps["cls.b3"]
    return logits, weights


def aggregate_and_classify(runs, ps):
    """Weighted avg+max pooling over runs, then the classifier; returns a Verdict."""
    logits, weights = classify_logits(runs, ps)
    data = np.array(logits.data, dtype=float)
    label = LABEL_ORDER[int(np.argmax(data))]
    return Verdict(label=label, logits=data,
                   attention_weights=[float(w.data) for w in weights])


def build_rte_input(claim, selected, store):
    """Resolve selected (page, line) pairs to sentence texts.

    Unresolvable or empty lines are skipped with a warning; no padding is
    fabricated.  Zero usable sentences falls back to the claim text
    itself so a verdict is still produced.
    """
    text = claim.text if hasattr(claim, "text") else str(claim)
    claim_id = getattr(claim, "id", "?")
    sentences = []
    for page, line_no in list(selected)[:MAX_SENTENCES]:
        try:
            sentence = store.get_line(page, line_no)
        except NotFoundError:
            log.warning("claim %s: evidence (%r, %s) not in store; skipped",
                        claim_id, page, line_no)
            continue
        if not sentence:
            log.warning("claim %s: evidence (%r, %s) is an empty line; skipped",
                        claim_id, page, line_no)
            continue
        sentences.append(sentence)
    if not sentences:
        sentences = [text]
    return sentences


def _training_evidence(claim, selected, cap):
    """Gold pairs first (first evidence set), topped up from the selector."""
    chosen = []
    if claim.verifiable and claim.evidence_sets:
        chosen.extend(sorted(claim.evidence_sets[0]))
    for pair in selected:
        if len(chosen) >= cap:
            break
        pair = (pair[0], pair[1])
        if pair not in chosen:
            chosen.append(pair)
    return chosen[:cap]


def train_rte(claims, selected_evidence, store, lexicon, config=None, seed=0):
    """Cross-entropy training; returns the model with ``loss_history`` filled.

    ``selected_evidence`` maps claim id -> ranked (page, line) pairs from
    the sentence selector.  Supported/Refuted claims train on gold
    evidence topped up with selector output; NotEnoughInfo claims (no
    gold) train on the selector's picks alone.
    """
    cfg = config or RteTrainConfig()
    model = RteModel(
        EsimConfig(embed_dim=lexicon.dim, hidden=cfg.hidden,
                   projection_dim=cfg.projection_dim, dropout=cfg.dropout),
        attn_dim=cfg.attn_dim, classifier_dims=cfg.classifier_dims, seed=seed)
    rng = np.random.default_rng(seed)
    opt = make_optimizer(cfg.optimizer, cfg.lr)
    selected_evidence = selected_evidence or {}

    examples = []
    skipped = 0
    for claim in claims:
        if claim.label is None:
            skipped += 1
            continue
        pairs = _training_evidence(claim, selected_evidence.get(claim.id, ()),
                                   cfg.sentences)
        texts = build_rte_input(claim, pairs, store)
        try:
            claim_vecs = lexicon.embed_text(claim.text)
            sentence_vecs = [lexicon.embed_text(t) for t in texts]
        except ValueError:
            skipped += 1
            continue
        examples.append((LABEL_ORDER.index(claim.label), claim_vecs,
                         sentence_vecs))
    if skipped:
        log.warning("train_rte: skipped %d unusable claims", skipped)
    if not examples:
        log.warning("train_rte: no usable training claims")
        return model

    for epoch in range(cfg.epochs):
        order = rng.permutation(len(examples))
        total_loss, correct = 0.0, 0
        for idx in order:
            target, claim_vecs, sentence_vecs = examples[idx]
            model.params.zero_grad()
            runs = model.encode_runs(claim_vecs, sentence_vecs,
                                     train=True, rng=rng)
            logits, _ = classify_logits(runs, model.params)
            loss = cross_entropy(logits, target)
            backward(loss)
            opt.step(model.params, model.params.gradients())
            total_loss += float(loss.data)
            correct += int(np.argmax(logits.data) == target)
        mean_loss = total_loss / len(examples)
        model.loss_history.append(mean_loss)
        log.info("rte seed=%d epoch=%d mean_loss=%.6f train_acc=%.3f",
                 seed, epoch, mean_loss, correct / len(examples))
    return model


def predict(model, claim, selected, store, lexicon):
    """Deterministic Verdict for one claim given its selected evidence."""
    texts = build_rte_input(claim, selected, store)
    text = claim.text if hasattr(claim, "text") else str(claim)
    claim_vecs = lexicon.embed_text(text)
    runs = model.encode_runs(claim_vecs, [lexicon.embed_text(t) for t in texts])
    return aggregate_and_classify(runs, model.params)


def sentence_count_sweep(model, claims, selected_evidence, store, lexicon,
                         counts=(1, 2, 3, 4, 5)):
    """Evaluate with the first n selected sentences for each n.

    Returns [(n, label_accuracy, fever_score)] — the experiment grid for
    studying how many evidence sentences the classifier should read.
    """
    from .evaluation import PredictionRecord, fever_score, label_accuracy

    selected_evidence = selected_evidence or {}
    rows = []
    for n in counts:
        preds = []
        for claim in claims:
            selected = [tuple(p) for p in selected_evidence.get(claim.id, ())][:n]
            verdict = predict(model, claim, selected, store, lexicon)
            preds.append(PredictionRecord(claim_id=claim.id,
                                          predicted_evidence=selected,
                                          predicted_label=verdict.label))
        rows.append((n, label_accuracy(preds, claims), fever_score(preds, claims)))
    return rows
