"""Article dump ingestion, claim dataset loading, and the title-indexed store.

Input files are line-delimited records.  A dump record carries an article
id, its body text, and a ``lines`` field encoding numbered sentences as
``N<TAB>sentence[<TAB>anchor...]`` segments separated by newlines; anchor
tokens are discarded at ingest.  A claim record carries an id, a label,
the claim text, and evidence grouped into alternative sets of
``[annotation_id, evidence_id, page, line]`` quadruples.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .lexicon import stem_tokens, tokenize

log = logging.getLogger(__name__)

STORE_VERSION = 1


class Label(str, Enum):
    SUPPORTED = "Supported"
    REFUTED = "Refuted"
    NOT_ENOUGH_INFO = "NotEnoughInfo"


# dataset label strings as they appear in claim files
_LABEL_FROM_DATASET = {
    "SUPPORTS": Label.SUPPORTED,
    "REFUTES": Label.REFUTED,
    "NOT ENOUGH INFO": Label.NOT_ENOUGH_INFO,
}
_LABEL_TO_DATASET = {v: k for k, v in _LABEL_FROM_DATASET.items()}


def label_to_dataset_string(label):
    return _LABEL_TO_DATASET[Label(label)]


def label_from_dataset_string(raw):
    try:
        return _LABEL_FROM_DATASET[raw]
    except KeyError:
        raise ClaimFormatError(f"unknown label string {raw!r}") from None


class NotFoundError(KeyError):
    """Lookup of a page or line that is not in the store."""


class ClaimFormatError(ValueError):
    """A claim record that cannot be interpreted."""


def normalize_title(title):
    """Canonical page id form: spaces become underscores, case preserved."""
    return title.strip().replace(" ", "_")


@dataclass
class Article:
    id: str
    text: str
    lines: list  # ordered (line_no, sentence) pairs; empty sentences kept

    def line_map(self):
        return dict(self.lines)


@dataclass
class Claim:
    id: int
    text: str
    label: Label | None = None
    evidence_sets: list = field(default_factory=list)  # list of sets of (page, line)

    @property
    def verifiable(self):
        return self.label in (Label.SUPPORTED, Label.REFUTED)


def _parse_lines_field(raw, counters):
    """Decode the numbered-sentence block of a dump record."""
    lines = []
    if not raw:
        return lines
    prev = -1
    for segment in raw.split("\n"):
        if segment == "":
            continue
        parts = segment.split("\t")
        try:
            line_no = int(parts[0])
        except ValueError:
            counters["malformed_lines"] += 1
            continue
        if line_no <= prev:
            counters["malformed_lines"] += 1
            continue
        sentence = parts[1] if len(parts) > 1 else ""
        # anything after the sentence is anchor text; drop it
        lines.append((line_no, sentence))
        prev = line_no
    return lines


class ArticleStore:
    """Immutable-after-ingest article map with exact and token title indexes."""

    def __init__(self):
        self._articles = {}
        self._exact = {}        # normalized title -> id (identity for ingested ids)
        self._token_index = {}  # stemmed title token -> set of ids
        self.counters = {"records": 0, "malformed_records": 0,
                         "malformed_lines": 0, "duplicates": 0}

    # ---- construction --------------------------------------------------------

    def _add(self, article):
        if article.id in self._articles:
            self.counters["duplicates"] += 1
            log.warning("duplicate article id %r: keeping the later record", article.id)
            self._drop_index_entries(article.id)
        self._articles[article.id] = article
        self._exact[article.id] = article.id
        for tok in set(stem_tokens(tokenize(article.id.replace("_", " ")).tokens)):
            self._token_index.setdefault(tok, set()).add(article.id)

    def _drop_index_entries(self, page_id):
        for ids in self._token_index.values():
            ids.discard(page_id)

    # ---- lookups ----------------------------------------------------------------

    def __len__(self):
        return len(self._articles)

    def __contains__(self, page_id):
        return page_id in self._articles

    def ids(self):
        return list(self._articles)

    def get(self, page_id):
        try:
            return self._articles[page_id]
        except KeyError:
            raise NotFoundError(f"unknown page {page_id!r}") from None

    def get_line(self, page_id, line_no):
        article = self.get(page_id)
        for num, sentence in article.lines:
            if num == line_no:
                return sentence
        raise NotFoundError(f"page {page_id!r} has no line {line_no}")

    def has_line(self, page_id, line_no):
        try:
            self.get_line(page_id, line_no)
            return True
        except NotFoundError:
            return False

    def exact_title_lookup(self, mention):
        """Exact match after space/underscore normalization; case-sensitive."""
        return self._exact.get(normalize_title(mention))

    def titles_with_token(self, stemmed_token):
        return self._token_index.get(stemmed_token, set())

    # ---- persistence ----------------------------------------------------------------

    def save(self, store_dir, source_checksum=None):
        store_dir = Path(store_dir)
        store_dir.mkdir(parents=True, exist_ok=True)
        with open(store_dir / "articles.jsonl", "w", encoding="utf-8") as fh:
            for article in self._articles.values():
                fh.write(json.dumps({"id": article.id, "text": article.text,
                                     "lines": article.lines}, ensure_ascii=False) + "\n")
        meta = {"version": STORE_VERSION, "source_checksum": source_checksum,
                "counters": self.counters}
        (store_dir / "meta.json").write_text(json.dumps(meta, indent=1))

    @classmethod
    def open(cls, store_dir):
        store_dir = Path(store_dir)
        meta = json.loads((store_dir / "meta.json").read_text())
        if meta.get("version") != STORE_VERSION:
            raise ValueError(f"store version {meta.get('version')} unsupported")
        store = cls()
        with open(store_dir / "articles.jsonl", encoding="utf-8") as fh:
            for line in fh:
                rec = json.loads(line)
                store._add(Article(rec["id"], rec["text"],
                                   [(int(n), s) for n, s in rec["lines"]]))
        store.counters = meta.get("counters", store.counters)
        return store


def _file_checksum(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def ingest_dump(path, store_dir=None, force=False):
    """Build an ArticleStore from a line-delimited dump.

    With ``store_dir`` the store is persisted there and reused on later
    calls as long as the dump checksum is unchanged (pass ``force`` to
    rebuild anyway).
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"dump file not found: {path}")
    checksum = _file_checksum(path)

    if store_dir is not None and not force:
        meta_path = Path(store_dir) / "meta.json"
        if meta_path.exists():
            meta = json.loads(meta_path.read_text())
            if meta.get("source_checksum") == checksum:
                log.info("store %s is current; skipping rebuild", store_dir)
                return ArticleStore.open(store_dir)

    store = ArticleStore()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            store.counters["records"] += 1
            try:
                rec = json.loads(line)
                page_id = normalize_title(str(rec["id"]))
                if not page_id:
                    raise ValueError("empty id")
                lines = _parse_lines_field(rec.get("lines", ""), store.counters)
                article = Article(page_id, rec.get("text", ""), lines)
            except (ValueError, KeyError, TypeError) as exc:
                store.counters["malformed_records"] += 1
                log.warning("skipping malformed dump record: %s", exc)
                continue
            store._add(article)

    if store.counters["malformed_records"]:
        log.warning("ingest skipped %d malformed records",
                    store.counters["malformed_records"])
    if store_dir is not None:
        store.save(store_dir, source_checksum=checksum)
    return store


def _evidence_sets_from_record(raw_groups):
    sets = []
    for group in raw_groups or []:
        pairs = set()
        for quad in group:
            page, line = quad[2], quad[3]
            if page is None or line is None:
                continue  # NotEnoughInfo placeholder entry
            pairs.add((normalize_title(str(page)), int(line)))
        if pairs:
            sets.append(pairs)
    return sets


def load_claims(path, strict=True):
    """Read a claim dataset file into Claim objects.

    Unknown label strings raise ``ClaimFormatError`` when ``strict``;
    otherwise the record is skipped and counted.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"claims file not found: {path}")
    claims, rejected = [], 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                label = None
                if rec.get("label") is not None:
                    label = label_from_dataset_string(rec["label"])
                claim = Claim(
                    id=int(rec["id"]),
                    text=str(rec["claim"]),
                    label=label,
                    evidence_sets=_evidence_sets_from_record(rec.get("evidence")),
                )
                if label is Label.NOT_ENOUGH_INFO:
                    claim.evidence_sets = []
            except (ClaimFormatError, KeyError, ValueError, TypeError) as exc:
                if strict:
                    raise ClaimFormatError(f"{path}:{lineno}: {exc}") from exc
                rejected += 1
                log.warning("rejecting claim record at %s:%d: %s", path, lineno, exc)
                continue
            claims.append(claim)
    if rejected:
        log.warning("rejected %d claim records", rejected)
    return claims


def validate_evidence(claims, store):
    """(claim_id, page, line) triples of gold evidence that does not resolve."""
    problems = []
    for claim in claims:
        for ev_set in claim.evidence_sets:
            for page, line in sorted(ev_set):
                if not (page in store and store.has_line(page, line)):
                    problems.append((claim.id, page, line))
    return problems
