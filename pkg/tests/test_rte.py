import logging

import numpy as np
import pytest

from factpipe.corpus import Claim, Label
from factpipe.esim import EsimConfig, PairEncoding
from factpipe.fixtures import build_fixture
from factpipe.lexicon import Lexicon
from factpipe.numerics import ParamSet, Tensor, cross_entropy, gradcheck
from factpipe.rte import (
    LABEL_ORDER,
    RteModel,
    RteTrainConfig,
    _training_evidence,
    aggregate_and_classify,
    attention_weights,
    build_rte_input,
    classify_logits,
    predict,
    sentence_count_sweep,
    summarize_statements,
    train_rte,
)


def fake_run(claim_rows, sent_rows, final=None):
    two_h = len(claim_rows[0])
    if final is None:
        final = np.zeros(4 * two_h)
    return PairEncoding(final_hidden=Tensor(final),
                        claim_token_encodings=Tensor(claim_rows),
                        sentence_token_encodings=Tensor(sent_rows))


def attn_params(two_h, attn_dim, seed=0, zero=False):
    ps = ParamSet(seed)
    if zero:
        ps.add("attn.w", (two_h, attn_dim), init="zeros")
    else:
        ps.add("attn.w", (two_h, attn_dim), fan=two_h)
    ps.add("attn.b", (attn_dim,), init="zeros")
    return ps


# ---- summaries -----------------------------------------------------------------------


def test_summarize_single_run_single_token_is_identity():
    run = fake_run([[1.0, 2.0, 3.0]], [[5.0, 6.0, 7.0]])
    claim_summary, sentence_summaries = summarize_statements([run])
    assert np.array_equal(claim_summary.data, [1.0, 2.0, 3.0])
    assert len(sentence_summaries) == 1
    assert np.array_equal(sentence_summaries[0].data, [5.0, 6.0, 7.0])


def test_summarize_sums_over_tokens_and_runs():
    claim_rows = [[1.0, 0.0], [0.0, 1.0], [2.0, 2.0]]
    runs = [fake_run(claim_rows, [[float(i), 1.0]]) for i in range(5)]
    claim_summary, sentence_summaries = summarize_statements(runs)
    # claim token sum is (3, 3); five runs stack up to (15, 15)
    assert np.allclose(claim_summary.data, [15.0, 15.0])
    for i, summary in enumerate(sentence_summaries):
        assert np.array_equal(summary.data, [float(i), 1.0])


def test_summarize_zero_encodings_give_zero_summaries():
    run = fake_run(np.zeros((4, 3)), np.zeros((2, 3)))
    claim_summary, sentence_summaries = summarize_statements([run, run])
    assert np.array_equal(claim_summary.data, np.zeros(3))
    assert np.array_equal(sentence_summaries[0].data, np.zeros(3))


def test_summarize_run_count_validation():
    run = fake_run([[1.0, 1.0]], [[1.0, 1.0]])
    with pytest.raises(ValueError):
        summarize_statements([])
    with pytest.raises(ValueError):
        summarize_statements([run] * 6)


# ---- attention weights ---------------------------------------------------------------


def test_attention_identical_summaries_weight_one():
    ps = attn_params(3, 4, seed=1)
    v = Tensor([0.3, -1.2, 0.7])
    (w,) = attention_weights(v, [Tensor(v.data.copy())], ps)
    assert float(w.data) == pytest.approx(1.0, abs=1e-12)


def test_attention_zero_projection_weight_zero():
    ps = attn_params(3, 4, zero=True)
    weights = attention_weights(Tensor([1.0, 2.0, 3.0]),
                                [Tensor([4.0, 5.0, 6.0])], ps)
    assert float(weights[0].data) == 0.0


def test_attention_weights_bounded_and_per_sentence():
    rng = np.random.default_rng(7)
    ps = attn_params(5, 3, seed=2)
    summaries = [Tensor(rng.normal(size=5)) for _ in range(4)]
    weights = attention_weights(Tensor(rng.normal(size=5)), summaries, ps)
    assert len(weights) == 4
    for w in weights:
        assert -1.0 - 1e-12 <= float(w.data) <= 1.0 + 1e-12


def test_attention_requires_a_sentence():
    ps = attn_params(3, 3)
    with pytest.raises(ValueError):
        attention_weights(Tensor([1.0, 0.0, 0.0]), [], ps)


def test_attention_duplicate_sentences_get_identical_weights():
    model = RteModel(EsimConfig(embed_dim=4, hidden=2), attn_dim=3,
                     classifier_dims=(5, 4), seed=3)
    rng = np.random.default_rng(4)
    claim = rng.normal(size=(2, 4))
    sentence = rng.normal(size=(3, 4))
    runs = model.encode_runs(claim, [sentence, sentence])
    _, weights = classify_logits(runs, model.params)
    assert float(weights[0].data) == float(weights[1].data)


# ---- classification ------------------------------------------------------------------


def test_single_run_logits_match_manual_forward():
    model = RteModel(EsimConfig(embed_dim=4, hidden=2), attn_dim=3,
                     classifier_dims=(5, 4), seed=7)
    rng = np.random.default_rng(8)
    runs = model.encode_runs(rng.normal(size=(2, 4)), [rng.normal(size=(3, 4))])
    logits, weights = classify_logits(runs, model.params)

    p = {name: t.data for name, t in model.params.items()}
    claim_sum = runs[0].claim_token_encodings.data.sum(axis=0)
    sent_sum = runs[0].sentence_token_encodings.data.sum(axis=0)
    pc = np.tanh(claim_sum @ p["attn.w"] + p["attn.b"])
    sc = np.tanh(sent_sum @ p["attn.w"] + p["attn.b"])
    w = float(pc @ sc / (np.linalg.norm(pc) * np.linalg.norm(sc)))
    row = w * runs[0].final_hidden.data
    pooled = np.concatenate([row, row])  # avg and max of one row are the row
    h1 = np.maximum(pooled @ p["cls.w1"] + p["cls.b1"], 0.0)
    h2 = np.maximum(h1 @ p["cls.w2"] + p["cls.b2"], 0.0)
    expected = h2 @ p["cls.w3"] + p["cls.b3"]

    assert float(weights[0].data) == pytest.approx(w, rel=1e-10)
    assert np.allclose(logits.data, expected, atol=1e-10)
    assert logits.shape == (3,)


def test_logits_invariant_to_sentence_order():
    model = RteModel(EsimConfig(embed_dim=4, hidden=2), attn_dim=3,
                     classifier_dims=(6, 5), seed=9)
    rng = np.random.default_rng(10)
    claim = rng.normal(size=(2, 4))
    sentences = [rng.normal(size=(n, 4)) for n in (3, 2, 4)]
    forward = classify_logits(model.encode_runs(claim, sentences),
                              model.params)[0]
    reverse = classify_logits(model.encode_runs(claim, sentences[::-1]),
                              model.params)[0]
    assert np.allclose(forward.data, reverse.data, atol=1e-12)


def test_aggregate_label_is_argmax_in_label_order():
    model = RteModel(EsimConfig(embed_dim=4, hidden=2), attn_dim=2,
                     classifier_dims=(4, 4), seed=11)
    rng = np.random.default_rng(12)
    runs = model.encode_runs(rng.normal(size=(3, 4)),
                             [rng.normal(size=(2, 4)), rng.normal(size=(4, 4))])
    verdict = aggregate_and_classify(runs, model.params)
    assert verdict.label is LABEL_ORDER[int(np.argmax(verdict.logits))]
    assert verdict.logits.shape == (3,)
    assert len(verdict.attention_weights) == 2
    assert all(isinstance(w, float) for w in verdict.attention_weights)


def test_label_order_fixed():
    assert LABEL_ORDER == (Label.SUPPORTED, Label.REFUTED,
                           Label.NOT_ENOUGH_INFO)


def test_full_graph_gradcheck():
    model = RteModel(EsimConfig(embed_dim=3, hidden=2), attn_dim=2,
                     classifier_dims=(5, 4), seed=11)
    rng = np.random.default_rng(3)
    claim = rng.normal(size=(2, 3))
    sentences = [rng.normal(size=(3, 3)), rng.normal(size=(2, 3))]

    def loss():
        runs = model.encode_runs(claim, sentences)
        logits, _ = classify_logits(runs, model.params)
        return cross_entropy(logits, 1)

    err = gradcheck(loss, model.params.tensors(), eps=1e-5, sample=6,
                    rng=np.random.default_rng(5))
    assert err < 1e-4


# ---- evidence resolution -------------------------------------------------------------


@pytest.fixture(scope="module")
def small_corpus(tmp_path_factory):
    out = tmp_path_factory.mktemp("rte-corpus")
    return build_fixture(out, entities=6, claims=6, ambiguity=False)


def test_build_rte_input_resolves_in_order(small_corpus):
    store, claims = small_corpus
    page = sorted(claims[0].evidence_sets[0])[0][0]
    texts = build_rte_input(claims[0], [(page, 1), (page, 0)], store)
    assert texts == [store.get_line(page, 1), store.get_line(page, 0)]


def test_build_rte_input_caps_at_five(small_corpus):
    store, claims = small_corpus
    page = sorted(claims[0].evidence_sets[0])[0][0]
    texts = build_rte_input(claims[0], [(page, n) for n in range(6)], store)
    assert len(texts) == 5
    assert texts[-1] == store.get_line(page, 4)


def test_build_rte_input_skips_bad_pairs_with_warnings(small_corpus, caplog):
    store, claims = small_corpus
    page = sorted(claims[0].evidence_sets[0])[0][0]
    with caplog.at_level(logging.WARNING, logger="factpipe.rte"):
        texts = build_rte_input(claims[0],
                                [("No_Such_Page", 0), (page, 99),
                                 (page, 6),  # trailing empty line
                                 (page, 2)],
                                store)
    assert texts == [store.get_line(page, 2)]
    assert sum("not in store" in r.message for r in caplog.records) == 2
    assert sum("empty line" in r.message for r in caplog.records) == 1


def test_build_rte_input_falls_back_to_claim_text(small_corpus):
    store, _ = small_corpus
    assert build_rte_input("A bare claim.", [("Missing", 0)], store) == \
        ["A bare claim."]


def test_training_evidence_gold_first_then_selector_topup():
    claim = Claim(id=1, text="t", label=Label.SUPPORTED,
                  evidence_sets=[{("B", 2), ("A", 1)}, {("C", 0)}])
    selected = [("A", 1), ("D", 3), ("E", 4), ("F", 5)]
    chosen = _training_evidence(claim, selected, cap=4)
    assert chosen == [("A", 1), ("B", 2), ("D", 3), ("E", 4)]


def test_training_evidence_nei_uses_selector_only():
    claim = Claim(id=2, text="t", label=Label.NOT_ENOUGH_INFO)
    chosen = _training_evidence(claim, [("A", 0), ("B", 1)], cap=5)
    assert chosen == [("A", 0), ("B", 1)]


def test_training_evidence_respects_cap():
    claim = Claim(id=3, text="t", label=Label.REFUTED,
                  evidence_sets=[{("A", n) for n in range(7)}])
    chosen = _training_evidence(claim, [], cap=5)
    assert chosen == [("A", n) for n in range(5)]


# ---- training ------------------------------------------------------------------------


def test_train_rte_overfits_a_small_balanced_corpus(tmp_path):
    store, claims = build_fixture(tmp_path, entities=12, claims=12,
                                  ambiguity=False)
    lex = Lexicon.synthetic(16)
    cfg = RteTrainConfig(hidden=6, attn_dim=6, classifier_dims=(24, 24),
                         sentences=5, epochs=60, lr=3e-3)
    model = train_rte(claims, {}, store, lex, config=cfg, seed=2)

    assert len(model.loss_history) == 60
    assert model.loss_history[-1] < 0.1
    correct, seen = 0, set()
    for claim in claims:
        pairs = _training_evidence(claim, (), cfg.sentences)
        verdict = predict(model, claim, pairs, store, lex)
        seen.add(verdict.label)
        correct += verdict.label is claim.label
    assert correct / len(claims) >= 0.9
    assert seen == {Label.SUPPORTED, Label.REFUTED, Label.NOT_ENOUGH_INFO}


def test_train_rte_is_deterministic_for_a_seed(small_corpus):
    store, claims = small_corpus
    lex = Lexicon.synthetic(8)
    cfg = RteTrainConfig(hidden=4, attn_dim=4, classifier_dims=(8, 8),
                         epochs=2, lr=1e-3)
    a = train_rte(claims, {}, store, lex, config=cfg, seed=5)
    b = train_rte(claims, {}, store, lex, config=cfg, seed=5)
    assert a.loss_history == b.loss_history
    assert a.params.checksum() == b.params.checksum()


def test_train_rte_skips_unusable_claims(small_corpus, caplog):
    store, claims = small_corpus
    lex = Lexicon.synthetic(8)
    cfg = RteTrainConfig(hidden=4, attn_dim=4, classifier_dims=(8, 8),
                         epochs=1, lr=1e-3)
    unlabeled = Claim(id=900, text="An unlabeled claim.")
    empty = Claim(id=901, text="", label=Label.NOT_ENOUGH_INFO)
    with caplog.at_level(logging.WARNING, logger="factpipe.rte"):
        model = train_rte([claims[0], unlabeled, empty], {}, store, lex,
                          config=cfg, seed=0)
    assert any("skipped 2 unusable claims" in r.message for r in caplog.records)
    assert len(model.loss_history) == 1


def test_train_rte_with_no_usable_claims_returns_untrained(small_corpus, caplog):
    store, _ = small_corpus
    lex = Lexicon.synthetic(8)
    with caplog.at_level(logging.WARNING, logger="factpipe.rte"):
        model = train_rte([Claim(id=1, text="x")], {}, store, lex,
                          config=RteTrainConfig(hidden=4, epochs=3), seed=0)
    assert model.loss_history == []
    assert any("no usable training claims" in r.message for r in caplog.records)


def test_rte_save_load_roundtrip(tmp_path, small_corpus):
    store, claims = small_corpus
    lex = Lexicon.synthetic(8)
    cfg = RteTrainConfig(hidden=4, attn_dim=3, classifier_dims=(6, 5),
                         epochs=1, lr=1e-3)
    model = train_rte(claims, {}, store, lex, config=cfg, seed=6)
    path = tmp_path / "rte.fpck"
    model.save(path)
    loaded = RteModel.load(path)
    assert loaded.cfg == model.cfg
    assert loaded.attn_dim == model.attn_dim
    assert loaded.classifier_dims == model.classifier_dims

    claim = claims[0]
    pairs = _training_evidence(claim, (), 5)
    before = predict(model, claim, pairs, store, lex)
    after = predict(loaded, claim, pairs, store, lex)
    assert np.array_equal(before.logits, after.logits)
    assert before.label is after.label


def test_sentence_count_sweep_rows(small_corpus):
    store, claims = small_corpus
    lex = Lexicon.synthetic(8)
    model = train_rte(claims, {}, store, lex,
                      config=RteTrainConfig(hidden=4, attn_dim=4,
                                            classifier_dims=(8, 8), epochs=0),
                      seed=1)
    selected = {c.id: sorted(c.evidence_sets[0]) if c.evidence_sets else []
                for c in claims}
    rows = sentence_count_sweep(model, claims, selected, store, lex)
    assert [n for n, _, _ in rows] == [1, 2, 3, 4, 5]
    for _, label_acc, fever in rows:
        assert 0.0 <= fever <= label_acc <= 1.0
