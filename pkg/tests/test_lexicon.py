import numpy as np
import pytest
from hypothesis import given, strategies as st

from factpipe.lexicon import (
    EmbeddingFormatError,
    EmbeddingTable,
    Lexicon,
    embed,
    load_embedding_table,
    stem_tokens,
    tokenize,
)


def test_tokenize_claim_sentence():
    ts = tokenize("Down With Love is a 2003 comedy film.")
    assert ts.tokens == ["Down", "With", "Love", "is", "a", "2003", "comedy", "film", "."]


def test_tokenize_empty():
    assert tokenize("").tokens == []


def test_tokenize_parenthesized_title():
    ts = tokenize("Alex Jones (radio host)")
    assert ts.tokens == ["Alex", "Jones", "(", "radio", "host", ")"]


def test_tokenize_offsets_are_increasing_and_nonoverlapping():
    ts = tokenize("It's a well-known fact.")
    last_end = 0
    for start, end in ts.offsets:
        assert start >= last_end
        assert end > start
        last_end = end


@given(st.text(max_size=80))
def test_tokenize_roundtrip_covers_non_whitespace(text):
    ts = tokenize(text)
    rebuilt = "".join(ts.tokens)
    reference = "".join(text.split())
    assert rebuilt == reference
    for tok, (start, end) in zip(ts.tokens, ts.offsets):
        assert text[start:end] == tok


def test_stem_tokens_drops_punctuation():
    ts = tokenize("Homer Hickman wrote some historical fiction novels.")
    stems = stem_tokens(ts.tokens)
    assert "." not in stems
    assert stems[-1] == "novel"


def _write_vectors(path, lines):
    path.write_text("\n".join(lines) + "\n")
    return path


def test_load_embedding_table(tmp_path):
    p = _write_vectors(tmp_path / "vecs.txt", ["cat 1 2 3", "dog 4 5 6"])
    table = load_embedding_table(p, 3)
    assert len(table) == 2
    assert np.allclose(table.lookup("cat"), [1, 2, 3])


def test_load_embedding_table_skips_header(tmp_path):
    p = _write_vectors(tmp_path / "vecs.txt", ["2 3", "cat 1 2 3", "dog 4 5 6"])
    table = load_embedding_table(p, 3)
    assert len(table) == 2


def test_load_embedding_table_dim_mismatch(tmp_path):
    p = _write_vectors(tmp_path / "vecs.txt", ["cat 1 2 3", "dog 4 5"])
    with pytest.raises(EmbeddingFormatError, match="2"):
        load_embedding_table(p, 3)


def test_load_embedding_duplicate_keeps_first(tmp_path):
    p = _write_vectors(tmp_path / "vecs.txt", ["cat 1 2 3", "cat 9 9 9"])
    table = load_embedding_table(p, 3)
    assert np.allclose(table.lookup("cat"), [1, 2, 3])


def test_embed_concatenates_in_order(tmp_path):
    t1 = load_embedding_table(_write_vectors(tmp_path / "a.txt", ["cat 1 2 3"]), 3)
    t2 = load_embedding_table(_write_vectors(tmp_path / "b.txt", ["cat 7 8"]), 2)
    vec = embed((t1, t2), "cat")
    assert vec.shape == (5,)
    assert np.allclose(vec[:3], [1, 2, 3])
    assert np.allclose(vec[3:], [7, 8])


def test_embed_oov_deterministic(tmp_path):
    t1 = EmbeddingTable.synthetic(3, salt="one")
    t2 = EmbeddingTable.synthetic(2, salt="two")
    v1 = embed((t1, t2), "zyzzyva")
    v2 = embed((t1, t2), "zyzzyva")
    assert np.array_equal(v1, v2)
    assert np.all(np.abs(v1) <= 0.05)


def test_embed_partial_oov(tmp_path):
    t1 = load_embedding_table(_write_vectors(tmp_path / "a.txt", ["cat 1 2 3"]), 3)
    t2 = EmbeddingTable.synthetic(2, salt="two")
    vec = embed((t1, t2), "cat")
    assert np.allclose(vec[:3], [1, 2, 3])
    assert np.array_equal(vec[3:], t2.lookup("cat"))


def test_embed_case_fallback(tmp_path):
    t1 = load_embedding_table(_write_vectors(tmp_path / "a.txt", ["love 1 1 1"]), 3)
    assert np.allclose(t1.lookup("Love"), [1, 1, 1])


def test_embed_length_always_dim1_plus_dim2():
    lex = Lexicon.synthetic(10)
    for token in ["a", "2003", "Down", "żółw"]:
        assert lex.embed_token(token).shape == (10,)
    assert lex.embed_tokens(["a", "b"]).shape == (2, 10)


def test_synthetic_tables_differ_between_slots():
    lex = Lexicon.synthetic(10)
    v = lex.embed_token("film")
    assert not np.array_equal(v[:5], v[5:])
