import json

import pytest

from factpipe.corpus import (
    ArticleStore,
    Claim,
    ClaimFormatError,
    Label,
    NotFoundError,
    ingest_dump,
    load_claims,
    normalize_title,
    validate_evidence,
)


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")
    return path


@pytest.fixture
def toy_dump(tmp_path):
    records = [
        {"id": "Down_With_Love",
         "text": "Down with Love is a 2003 romantic comedy film.",
         "lines": "0\tDown with Love is a 2003 romantic comedy film.\tDown with Love"
                  "\n1\tIt stars Renee Zellweger.\tRenee Zellweger"},
        {"id": "Love", "text": "Love is an emotion.",
         "lines": "0\tLove is an emotion.\n1\t\n2\tIt has many forms."},
        {"id": "Alex_Jones_(radio_host)", "text": "Alex Jones is a radio host.",
         "lines": "0\tAlex Jones is a radio host."},
    ]
    return write_jsonl(tmp_path / "wiki.jsonl", records)


def test_ingest_parses_lines_and_drops_anchors(toy_dump):
    store = ingest_dump(toy_dump)
    assert len(store) == 3
    art = store.get("Down_With_Love")
    assert art.lines[0] == (0, "Down with Love is a 2003 romantic comedy film.")
    assert art.lines[1] == (1, "It stars Renee Zellweger.")


def test_ingest_preserves_empty_lines(toy_dump):
    store = ingest_dump(toy_dump)
    assert store.get_line("Love", 1) == ""
    assert store.get_line("Love", 2) == "It has many forms."


def test_ingest_empty_lines_field(tmp_path):
    dump = write_jsonl(tmp_path / "w.jsonl", [{"id": "Empty_Page", "text": "", "lines": ""}])
    store = ingest_dump(dump)
    assert store.get("Empty_Page").lines == []


def test_ingest_duplicate_id_last_writer_wins(tmp_path):
    dump = write_jsonl(tmp_path / "w.jsonl", [
        {"id": "Page", "text": "first", "lines": "0\tfirst"},
        {"id": "Page", "text": "second", "lines": "0\tsecond"},
    ])
    store = ingest_dump(dump)
    assert store.get_line("Page", 0) == "second"
    assert store.counters["duplicates"] == 1


def test_ingest_malformed_record_skipped(tmp_path):
    path = tmp_path / "w.jsonl"
    with open(path, "w") as fh:
        fh.write(json.dumps({"id": "Good", "text": "", "lines": "0\tok"}) + "\n")
        fh.write("this is not json\n")
        fh.write(json.dumps({"text": "no id", "lines": ""}) + "\n")
    store = ingest_dump(path)
    assert len(store) == 1
    assert store.counters["malformed_records"] == 2


def test_ingest_missing_file_fatal(tmp_path):
    with pytest.raises(FileNotFoundError):
        ingest_dump(tmp_path / "missing.jsonl")


def test_get_line_not_found_distinguishable(toy_dump):
    store = ingest_dump(toy_dump)
    with pytest.raises(NotFoundError):
        store.get_line("Nope", 0)
    with pytest.raises(NotFoundError):
        store.get_line("Love", 99)
    assert store.get_line("Love", 1) == ""  # empty is a real value, not an error


def test_get_line_roundtrip_everything_ingested(toy_dump):
    store = ingest_dump(toy_dump)
    for page_id in store.ids():
        for line_no, sentence in store.get(page_id).lines:
            assert store.get_line(page_id, line_no) == sentence


def test_exact_title_lookup(toy_dump):
    store = ingest_dump(toy_dump)
    assert store.exact_title_lookup("Down With Love") == "Down_With_Love"
    assert store.exact_title_lookup("down with love") is None  # case-sensitive
    assert store.exact_title_lookup("Alex Jones (radio host)") == "Alex_Jones_(radio_host)"
    assert store.exact_title_lookup("Alex Jones") is None


def test_normalize_title():
    assert normalize_title("Down With Love") == "Down_With_Love"
    assert normalize_title(" Alex Jones (radio host) ") == "Alex_Jones_(radio_host)"


def test_store_persistence_and_checksum_guard(toy_dump, tmp_path):
    store_dir = tmp_path / "store"
    store = ingest_dump(toy_dump, store_dir=store_dir)
    assert (store_dir / "meta.json").exists()

    # unchanged dump: reopened, not rebuilt, identical lookups
    reopened = ingest_dump(toy_dump, store_dir=store_dir)
    assert sorted(reopened.ids()) == sorted(store.ids())
    for page_id in store.ids():
        assert reopened.get(page_id).lines == store.get(page_id).lines
    assert reopened.exact_title_lookup("Down With Love") == "Down_With_Love"


def test_ingest_idempotent(toy_dump):
    a = ingest_dump(toy_dump)
    b = ingest_dump(toy_dump)
    assert sorted(a.ids()) == sorted(b.ids())
    for page_id in a.ids():
        assert a.get(page_id).lines == b.get(page_id).lines


@pytest.fixture
def toy_claims(tmp_path):
    records = [
        {"id": 1, "label": "SUPPORTS", "claim": "Down With Love is a 2003 comedy film.",
         "evidence": [[[100, 200, "Down_With_Love", 0]]]},
        {"id": 2, "label": "NOT ENOUGH INFO", "claim": "Love is old.",
         "evidence": [[[101, 201, None, None]]]},
        {"id": 3, "label": "REFUTES", "claim": "Alex Jones is apolitical.",
         "evidence": [[[102, 202, "Alex_Jones_(radio_host)", 0]],
                      [[103, 203, "Love", 0]]]},
    ]
    return write_jsonl(tmp_path / "claims.jsonl", records)


def test_load_claims_basic(toy_claims):
    claims = load_claims(toy_claims)
    assert [c.id for c in claims] == [1, 2, 3]
    assert claims[0].label is Label.SUPPORTED
    assert claims[0].evidence_sets == [{("Down_With_Love", 0)}]


def test_load_claims_nei_empty_evidence(toy_claims):
    claims = load_claims(toy_claims)
    assert claims[1].label is Label.NOT_ENOUGH_INFO
    assert claims[1].evidence_sets == []
    assert not claims[1].verifiable


def test_load_claims_multiple_sets_kept_distinct(toy_claims):
    claims = load_claims(toy_claims)
    assert len(claims[2].evidence_sets) == 2
    assert {("Alex_Jones_(radio_host)", 0)} in claims[2].evidence_sets
    assert {("Love", 0)} in claims[2].evidence_sets


def test_load_claims_unknown_label_rejected(tmp_path):
    path = write_jsonl(tmp_path / "c.jsonl", [
        {"id": 1, "label": "MAYBE", "claim": "x", "evidence": []},
        {"id": 2, "label": "SUPPORTS", "claim": "y",
         "evidence": [[[1, 1, "P", 0]]]},
    ])
    with pytest.raises(ClaimFormatError, match="MAYBE"):
        load_claims(path)
    lenient = load_claims(path, strict=False)
    assert [c.id for c in lenient] == [2]


def test_validate_evidence(toy_dump, toy_claims):
    store = ingest_dump(toy_dump)
    claims = load_claims(toy_claims)
    assert validate_evidence(claims, store) == []
    claims.append(Claim(id=9, text="z", label=Label.SUPPORTED,
                        evidence_sets=[{("Ghost_Page", 0)}]))
    assert validate_evidence(claims, store) == [(9, "Ghost_Page", 0)]
