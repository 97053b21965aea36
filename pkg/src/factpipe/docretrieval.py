"""Claim-to-articles retrieval: mention extraction, candidate search, filtering.

A claim is mapped to candidate page ids by (a) treating every noun phrase
as a potential entity mention, (b) adding the token prefix before the main
verb, and (c) adding the whole claim; each mention is searched against
article titles and the results are filtered by stemmed containment in the
claim.
"""

from __future__ import annotations

import logging
import os
import re
import time
from dataclasses import dataclass

from .lexicon import stem_tokens, tokenize

log = logging.getLogger(__name__)

DEFAULT_SEARCH_RESULTS = 7

NOUN_PHRASE = "noun_phrase"
BEFORE_MAIN_VERB = "before_main_verb"
FULL_CLAIM = "full_claim"

ORIGIN_SEARCH = "remote_search"
ORIGIN_EXACT = "exact_local"


@dataclass(frozen=True)
class Mention:
    text: str
    span: tuple          # [start, end) token indices in the claim
    source: str          # noun_phrase | before_main_verb | full_claim


@dataclass(frozen=True)
class CandidateTitle:
    title: str
    rank: int            # 1-based within its origin
    origin: str          # remote_search | exact_local


@dataclass
class ParseResult:
    noun_phrases: list   # [start, end) token spans
    main_verb: int | None


class SearchBackendError(RuntimeError):
    """The configured search backend could not produce results."""


# ---- fallback parse provider ---------------------------------------------------

_DETERMINERS = {
    "a", "an", "the", "this", "that", "these", "those", "every", "each",
    "some", "any", "no", "all", "both", "either", "neither", "another",
    "its", "his", "her", "their", "my", "our", "your",
}
_PREPOSITIONS = {
    "of", "in", "on", "at", "by", "for", "with", "from", "to", "into",
    "onto", "over", "under", "about", "after", "before", "between",
    "during", "through", "against", "among", "around", "as", "near",
    "off", "since", "until", "upon", "within", "without", "down", "up",
    "out", "than",
}
_CONNECTIVES = {
    "and", "or", "but", "nor", "so", "yet", "because", "although",
    "though", "while", "if", "when", "where", "which", "who", "whom",
    "whose", "not", "also", "very", "only", "there", "it", "he", "she",
    "they", "we", "i", "you",
}
_VERBS = {
    "is", "are", "was", "were", "be", "been", "being", "am",
    "has", "have", "had", "having", "does", "do", "did", "doing",
    "can", "could", "will", "would", "shall", "should", "may", "might",
    "must", "wrote", "writes", "write", "written", "played", "plays",
    "play", "stars", "starred", "star", "directed", "directs", "direct",
    "won", "wins", "win", "made", "makes", "make", "said", "says", "say",
    "born", "died", "dies", "die", "released", "releases", "release",
    "acted", "acts", "act", "ignored", "ignores", "ignore", "worked",
    "works", "work", "lived", "lives", "live", "created", "creates",
    "create", "produced", "produces", "produce", "appeared", "appears",
    "appear", "beats", "beat", "became", "becomes", "become", "began",
    "begins", "begin", "founded", "owns", "owned", "own", "married",
    "marries", "marry", "sang", "sings", "refused", "refuses", "refuse",
    "received", "receives", "receive", "remains", "remained", "remain",
    "features", "featured", "feature", "includes", "included", "include",
    "performed", "performs", "perform", "premiered", "premieres", "debuted",
    "opened", "opens", "ran", "runs", "run", "held", "holds", "hold",
         }


def _is_punct(token):
    return not any(ch.isalnum() for ch in token)


def _is_closed_class(token):
    low = token.lower()
    return low in _VERBS or low in _PREPOSITIONS or low in _CONNECTIVES


def _is_noun_like(token):
    return not _is_punct(token) and not _is_closed_class(token) \
        and token.lower() not in _DETERMINERS


class RuleChunker:
    """Deterministic noun-phrase chunker over a small closed-class lexicon.

    Emits maximal noun-like token runs (a determiner may open a run) and
    picks the first verb-lexicon token as the main verb.  Stands in for a
    constituency parser when none is plugged in.
    """

    def parse(self, tokens, claim_id=None):
        toks = list(tokens)
        n = len(toks)
        spans = []
        i = 0
        while i < n:
            tok = toks[i]
            if _is_noun_like(tok):
                start = i
                while i < n and _is_noun_like(toks[i]):
                    i += 1
                spans.append((start, i))
            elif tok.lower() in _DETERMINERS and i + 1 < n and _is_noun_like(toks[i + 1]):
                start = i
                i += 1
                while i < n and _is_noun_like(toks[i]):
                    i += 1
                spans.append((start, i))
            else:
                i += 1
        main_verb = next((i for i, t in enumerate(toks) if t.lower() in _VERBS), None)
        return ParseResult(noun_phrases=spans, main_verb=main_verb)


class PrecomputedParseProvider:
    """Parses supplied per claim id from a file; falls back to the chunker."""

    def __init__(self, parses_by_id, fallback=None):
        self.parses_by_id = parses_by_id
        self.fallback = fallback or RuleChunker()

    @classmethod
    def from_file(cls, path, fallback=None):
        import json

        parses = {}
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                rec = json.loads(line)
                parses[int(rec["id"])] = ParseResult(
                    noun_phrases=[tuple(span) for span in rec.get("noun_phrases", [])],
                    main_verb=rec.get("main_verb"),
                )
        return cls(parses, fallback=fallback)

    def parse(self, tokens, claim_id=None):
        if claim_id is not None and claim_id in self.parses_by_id:
            return self.parses_by_id[claim_id]
        return self.fallback.parse(tokens, claim_id=claim_id)


# ---- mention extraction -----------------------------------------------------------


def extract_mentions(tokens, parse):
    """Mentions for one claim: noun phrases, pre-verb prefix, full claim."""
    toks = list(tokens)
    mentions = []

    def add(span, source):
        text = " ".join(toks[span[0]:span[1]])
        if text and all(m.text != text for m in mentions):
            mentions.append(Mention(text=text, span=span, source=source))

    for span in parse.noun_phrases:
        add(tuple(span), NOUN_PHRASE)
    if parse.main_verb is not None and parse.main_verb > 0:
        add((0, parse.main_verb), BEFORE_MAIN_VERB)
    end = len(toks)
    while end > 0 and _is_punct(toks[end - 1]):
        end -= 1
    if end > 0:
        add((0, end), FULL_CLAIM)
    return mentions


# ---- candidate search -----------------------------------------------------------


def _title_stems(title):
    return set(stem_tokens(tokenize(title.replace("_", " ")).tokens))


def overlap_rank(titles, mention_text, k):
    """Rank titles by stemmed-token overlap with the mention.

    Ties break toward the shorter title, then lexicographically.  Titles
    with no overlap are dropped.
    """
    mention_stems = set(stem_tokens(tokenize(mention_text).tokens))
    scored = []
    for title in titles:
        overlap = len(_title_stems(title) & mention_stems)
        if overlap > 0:
            scored.append((-overlap, len(title), title))
    scored.sort()
    return [title for _, _, title in scored[:k]]


class LocalOverlapSearch:
    """Offline search backend: stemmed-token overlap over the store's titles."""

    def __init__(self, store):
        self.store = store

    def search(self, mention_text, k):
        stems = set(stem_tokens(tokenize(mention_text).tokens))
        pool = set()
        for s in stems:
            pool |= self.store.titles_with_token(s)
        return overlap_rank(sorted(pool), mention_text, k)


class MediaWikiSearch:
    """Online search backend against a MediaWiki ``list=search`` endpoint.

    Results are re-ranked client-side by title overlap with the mention.
    Requests are throttled to ``min_interval_s`` seconds apart.  Refuses
    to run when FACTPIPE_OFFLINE=1.
    """

    def __init__(self, endpoint="https://en.wikipedia.org/w/api.php",
                 min_interval_s=0.1, timeout_s=10.0, client=None):
        self.endpoint = endpoint
        self.min_interval_s = min_interval_s
        self.timeout_s = timeout_s
        self._client = client
        self._last_request = 0.0

    def _http(self):
        if self._client is None:
            import httpx

            self._client = httpx.Client(timeout=self.timeout_s)
        return self._client

    def search(self, mention_text, k):
        if os.environ.get("FACTPIPE_OFFLINE") == "1":
            raise SearchBackendError("FACTPIPE_OFFLINE=1 forbids network use")
        wait = self.min_interval_s - (time.monotonic() - self._last_request)
        if wait > 0:
            time.sleep(wait)
        params = {
            "action": "query",
            "list": "search",
            "srsearch": mention_text,
            "srlimit": str(k),
            "format": "json",
        }
        try:
            self._last_request = time.monotonic()
            resp = self._http().get(self.endpoint, params=params)
            resp.raise_for_status()
            hits = resp.json()["query"]["search"]
        except Exception as exc:
            raise SearchBackendError(f"mediawiki search failed: {exc}") from exc
        titles = [h["title"].replace(" ", "_") for h in hits]
        return overlap_rank(titles, mention_text, k)


def search_candidates(store, mention, k=DEFAULT_SEARCH_RESULTS, backend=None):
    """Search-backend results plus the exact-title hit for one mention.

    A failing remote backend falls back to the local overlap engine with a
    warning; it never aborts retrieval.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    text = mention.text if isinstance(mention, Mention) else mention
    if backend is None:
        backend = LocalOverlapSearch(store)
    try:
        titles = backend.search(text, k)
    except SearchBackendError as exc:
        log.warning("search backend failed (%s); falling back to local overlap", exc)
        titles = LocalOverlapSearch(store).search(text, k)
    candidates = [CandidateTitle(title=t, rank=i + 1, origin=ORIGIN_SEARCH)
                  for i, t in enumerate(titles)]
    exact = store.exact_title_lookup(text)
    if exact is not None and all(c.title != exact for c in candidates):
        candidates.append(CandidateTitle(title=exact, rank=1, origin=ORIGIN_EXACT))
    return candidates


# ---- candidate filtering ----------------------------------------------------------

_PARENS_RE = re.compile(r"\([^()]*\)")


def strip_parenthetical(title):
    """Drop parenthesized content from a title, underscores to spaces."""
    return _PARENS_RE.sub(" ", title.replace("_", " ")).strip()


def _contiguous_subsequence(needle, haystack):
    if not needle:
        return False
    n, m = len(needle), len(haystack)
    return any(haystack[i:i + n] == needle for i in range(m - n + 1))


def filter_candidates(claim_tokens, candidates):
    """Keep candidates whose stripped, stemmed title occurs contiguously
    in the stemmed claim."""
    claim_stems = stem_tokens(list(claim_tokens))
    kept = []
    for cand in candidates:
        title_stems = stem_tokens(tokenize(strip_parenthetical(cand.title)).tokens)
        if _contiguous_subsequence(title_stems, claim_stems):
            kept.append(cand)
    return kept


# ---- the full stage ------------------------------------------------------------------


def retrieve_documents(store, claim_text, parse_provider=None,
                       k=DEFAULT_SEARCH_RESULTS, backend=None, claim_id=None):
    """Page ids retrieved for a claim, in deterministic order.

    Order: first mention that produced the page, then candidate rank,
    then title.  Duplicates collapse onto their first occurrence.
    """
    parse_provider = parse_provider or RuleChunker()
    tokens = tokenize(claim_text)
    parse = parse_provider.parse(tokens.tokens, claim_id=claim_id)
    mentions = extract_mentions(tokens.tokens, parse)

    ordered = []
    seen = set()
    for m_idx, mention in enumerate(mentions):
        candidates = filter_candidates(
            tokens.tokens, search_candidates(store, mention, k=k, backend=backend))
        for cand in sorted(candidates, key=lambda c: (c.rank, c.title)):
            if cand.title not in seen:
                seen.add(cand.title)
                ordered.append(cand.title)
    return ordered
