"""Evidence sentence ranking: margin-trained ESIM scorers, ensembles, top-5 picks.

Training feeds the model a claim against the concatenated sentences of one
gold evidence set (positive) and a concatenation of sampled non-evidence
sentences from the same articles (negative), pushing the positive score at
least a margin of 1 above the negative.  Inference scores each candidate
sentence individually and averages over an ensemble of independently
seeded models.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .corpus import NotFoundError
from .esim import (EsimConfig, encode_pair, encode_statement, init_esim,
                   stash_config, unstash_config)
from .numerics import ParamSet, Tensor, backward, make_optimizer

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RankedSentence:
    page_id: str
    line_no: int
    score: float


@dataclass
class RankerTrainConfig:
    """Knobs for one ranking model's training run."""

    hidden: int = 100
    projection_dim: int | None = None
    dropout: float = 0.0
    epochs: int = 3
    lr: float = 1e-3
    optimizer: str = "adam"
    negatives: int = 5          # sentences per sampled negative concatenation
    negative_groups: int = 1    # negative concatenations per positive step


def hinge_loss(s_p, s_n_list):
    """Margin objective: sum over negatives of max(0, 1 + s_n - s_p).

    Accepts plain numbers (returns a float) or autodiff scalars (returns
    a Tensor wired into the graph).  An empty negative list costs 0.
    """
    tensors = isinstance(s_p, Tensor) or any(isinstance(s, Tensor) for s in s_n_list)
    if not tensors:
        return math.fsum(max(0.0, 1.0 + s_n - s_p) for s_n in s_n_list)
    s_p = s_p if isinstance(s_p, Tensor) else Tensor(float(s_p))
    total = None
    for s_n in s_n_list:
        s_n = s_n if isinstance(s_n, Tensor) else Tensor(float(s_n))
        term = (s_n - s_p + 1.0).relu()
        total = term if total is None else total + term
    return total if total is not None else Tensor(0.0)


class RankerModel:
    """ESIM encoder plus a scalar scoring head (8h -> r tanh -> 1 linear)."""

    def __init__(self, cfg, seed=0, params=None):
        self.cfg = cfg
        self.params = params if params is not None else _init_ranker_params(cfg, seed)
        self.loss_history = []

    @property
    def seed(self):
        return self.params.seed

    def score_pair(self, claim_vecs, sent_vecs, train=False, rng=None,
                   claim_encoded=None):
        """Ranking score of one claim-sentence pair as a scalar Tensor."""
        enc = encode_pair(claim_vecs, sent_vecs, self.params, self.cfg,
                          train=train, rng=rng, claim_encoded=claim_encoded)
        h = (enc.final_hidden @ self.params["rank.w1"] + self.params["rank.b1"]).tanh()
        return (h * self.params["rank.w2"]).sum() + self.params["rank.b2"]

    def encode_claim(self, claim_vecs, train=False, rng=None):
        """Input encoding of the claim, reusable across many sentences."""
        return encode_statement(claim_vecs, self.params, self.cfg,
                                train=train, rng=rng)

    def save(self, path):
        self.params.save(path)

    @classmethod
    def load(cls, path):
        ps = ParamSet.load(path)
        cfg, _ = unstash_config(ps)
        return cls(cfg, params=ps)


def _init_ranker_params(cfg, seed):
    ps = ParamSet(seed)
    init_esim(ps, cfg)
    r = cfg.hidden  # scoring-head width follows the encoder hidden size
    ps.add("rank.w1", (cfg.final_dim, r), fan=cfg.final_dim)
    ps.add("rank.b1", (r,), init="zeros")
    ps.add("rank.w2", (r,), fan=r)
    ps.add("rank.b2", (), init="zeros")
    stash_config(ps, cfg)
    return ps


def gold_pages(claim):
    """Pages the claim's gold evidence comes from, deduplicated, sorted."""
    pages = set()
    for ev_set in claim.evidence_sets:
        for page, _ in ev_set:
            pages.add(page)
    return sorted(pages)


def sample_negatives(claim, store, rng, m=5):
    """Sample non-evidence sentences from the claim's gold-evidence articles.

    Draws up to ``m`` sentences uniformly without replacement from the
    lines of every article a gold evidence set points into, excluding all
    gold lines and empty lines.  Fewer than ``m`` candidates means all of
    them are returned; none at all logs a warning and returns [].
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    gold = set()
    for ev_set in claim.evidence_sets:
        gold.update(ev_set)
    pool = []
    for page in gold_pages(claim):
        try:
            article = store.get(page)
        except NotFoundError:
            continue
        for line_no, sentence in article.lines:
            if sentence and (page, line_no) not in gold:
                pool.append((page, line_no, sentence))
    if not pool:
        log.warning("claim %s: no negative-sample candidates", claim.id)
        return []
    picks = rng.choice(len(pool), size=min(m, len(pool)), replace=False)
    return [pool[i] for i in picks]


def _positive_texts(claim, store):
    """Space-joined sentences of each resolvable gold evidence set."""
    texts = []
    for ev_set in claim.evidence_sets:
        parts = []
        for page, line_no in sorted(ev_set):
            try:
                sentence = store.get_line(page, line_no)
            except NotFoundError:
                parts = None
                break
            if not sentence:
                parts = None
                break
            parts.append(sentence)
        if parts:
            texts.append(" ".join(parts))
    return texts


def train_ranker(claims, store, lexicon, config=None, seed=0):
    """Train one ranking model; returns it with ``loss_history`` filled in.

    Each epoch visits every (claim, gold evidence set) pair once, scoring
    the positive concatenation against freshly sampled negative
    concatenations.  Claims whose evidence does not resolve in the store
    are skipped and counted.
    """
    cfg = config or RankerTrainConfig()
    model = RankerModel(
        EsimConfig(embed_dim=lexicon.dim, hidden=cfg.hidden,
                   projection_dim=cfg.projection_dim, dropout=cfg.dropout),
        seed=seed)
    rng = np.random.default_rng(seed)
    opt = make_optimizer(cfg.optimizer, cfg.lr)

    examples = []
    skipped = 0
    for claim in claims:
        if not claim.verifiable or not claim.evidence_sets:
            continue
        positives = _positive_texts(claim, store)
        if not positives:
            skipped += 1
            continue
        examples.append((claim, lexicon.embed_text(claim.text),
                         [lexicon.embed_text(t) for t in positives]))
    if skipped:
        log.warning("train_ranker: skipped %d claims with unresolvable evidence",
                    skipped)
    if not examples:
        log.warning("train_ranker: no usable training claims")
        return model

    for epoch in range(cfg.epochs):
        order = rng.permutation(len(examples))
        epoch_loss, steps = 0.0, 0
        for idx in order:
            claim, claim_vecs, positive_vecs = examples[idx]
            for pos_vecs in positive_vecs:
                neg_texts = []
                for _ in range(cfg.negative_groups):
                    sampled = sample_negatives(claim, store, rng, cfg.negatives)
                    if sampled:
                        neg_texts.append(" ".join(s for _, _, s in sampled))
                if not neg_texts:
                    continue
                model.params.zero_grad()
                claim_enc = model.encode_claim(claim_vecs, train=True, rng=rng)
                s_p = model.score_pair(claim_vecs, pos_vecs, train=True, rng=rng,
                                       claim_encoded=claim_enc)
                s_ns = [model.score_pair(claim_vecs, lexicon.embed_text(t),
                                         train=True, rng=rng,
                                         claim_encoded=claim_enc)
                        for t in neg_texts]
                loss = hinge_loss(s_p, s_ns)
                backward(loss)
                opt.step(model.params, model.params.gradients())
                epoch_loss += float(loss.data)
                steps += 1
        mean_loss = epoch_loss / max(1, steps)
        model.loss_history.append(mean_loss)
        log.info("ranker seed=%d epoch=%d mean_loss=%.6f", seed, epoch, mean_loss)
    return model


def train_ensemble(claims, store, lexicon, config=None, seeds=range(10)):
    """Independently seeded ranking models (ensemble of ten by default)."""
    return [train_ranker(claims, store, lexicon, config, seed=s) for s in seeds]


def collect_sentences(store, page_ids):
    """Non-empty (page_id, line_no, text) candidates from the given pages."""
    out, seen = [], set()
    for page in page_ids:
        if page in seen:
            continue
        seen.add(page)
        try:
            article = store.get(page)
        except NotFoundError:
            log.warning("collect_sentences: page %r not in store", page)
            continue
        for line_no, sentence in article.lines:
            if sentence:
                out.append((page, line_no, sentence))
    return out


def score_sentences(models, claim, sentences, lexicon):
    """Ensemble-mean score per candidate, sorted best-first.

    ``sentences`` holds (page_id, line_no, text) triples.  The score is
    the arithmetic mean over models (exact fsum, so model order never
    matters); ties sort by (page_id, line_no) ascending.
    """
    if not models:
        raise ValueError("score_sentences needs at least one model")
    text = claim.text if hasattr(claim, "text") else claim
    claim_vecs = lexicon.embed_text(text)
    claim_encs = [m.encode_claim(claim_vecs) for m in models]
    ranked = []
    for page, line_no, sentence in sentences:
        if not sentence:
            continue
        sent_vecs = lexicon.embed_text(sentence)
        scores = [float(m.score_pair(claim_vecs, sent_vecs, claim_encoded=e).data)
                  for m, e in zip(models, claim_encs)]
        ranked.append(RankedSentence(page, line_no,
                                     math.fsum(scores) / len(scores)))
    ranked.sort(key=lambda r: (-r.score, r.page_id, r.line_no))
    return ranked


def select_top5(ranked, n=5):
    """The first min(n, len) (page_id, line_no) pairs of a ranking."""
    return [(r.page_id, r.line_no) for r in ranked[:n]]
