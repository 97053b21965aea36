"""Tokenization, stemming, and word-embedding lookup.

Word vectors for a token are the concatenation of its entries in two
pretrained tables (e.g. GloVe and FastText, both loaded from the standard
text vector format).  Out-of-vocabulary tokens get a deterministic
hash-seeded vector so runs are reproducible.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field

import numpy as np

from .porter import porter_stem

_TOKEN_RE = re.compile(r"\w+|[^\w\s]")


@dataclass
class TokenSeq:
    """Ordered tokens plus their (start, end) character spans in the source."""

    tokens: list[str]
    offsets: list[tuple[int, int]]
    text: str = ""

    def __len__(self):
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def __getitem__(self, i):
        return self.tokens[i]


def tokenize(text):
    """Split on whitespace, keeping punctuation marks as their own tokens."""
    tokens, offsets = [], []
    for m in _TOKEN_RE.finditer(text):
        tokens.append(m.group())
        offsets.append(m.span())
    return TokenSeq(tokens, offsets, text)


def stem(word):
    """Porter stem of the lowercased word."""
    return porter_stem(word.lower())


def stem_tokens(tokens, drop_punct=True):
    """Stems of word tokens; punctuation-only tokens are dropped by default."""
    out = []
    for tok in tokens:
        if drop_punct and not any(ch.isalnum() for ch in tok):
            continue
        out.append(stem(tok))
    return out


class EmbeddingFormatError(ValueError):
    """Raised for malformed embedding files (wrong column count etc.)."""


@dataclass
class EmbeddingTable:
    """token -> fixed-length vector, plus a salt for deterministic OOV vectors."""

    dim: int
    entries: dict = field(default_factory=dict)
    salt: str = "emb"

    def __contains__(self, token):
        return token in self.entries

    def __len__(self):
        return len(self.entries)

    def lookup(self, token):
        """Vector for token: exact match, then lowercased, then hashed OOV."""
        vec = self.entries.get(token)
        if vec is None:
            vec = self.entries.get(token.lower())
        if vec is None:
            vec = oov_vector(token, self.dim, self.salt)
        return vec

    @classmethod
    def synthetic(cls, dim, salt="synthetic"):
        """Empty table: every token resolves to its hashed vector."""
        return cls(dim=dim, salt=salt)


def oov_vector(token, dim, salt):
    """Deterministic pseudo-random vector, uniform in [-0.05, 0.05]."""
    digest = hashlib.blake2b(f"{salt}\x00{token}".encode(), digest_size=8).digest()
    rng = np.random.default_rng(int.from_bytes(digest, "little"))
    return rng.uniform(-0.05, 0.05, size=dim)


def load_embedding_table(path, expected_dim, salt=None):
    """Read a text vector file: one 'token v1 .. vd' row per line.

    A leading 'count dim' header row is detected and skipped.  Duplicate
    tokens keep their first occurrence.
    """
    entries = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split(" ")
            if not parts or parts == [""]:
                continue
            if lineno == 1 and len(parts) == 2:
                try:
                    int(parts[0]), int(parts[1])
                    continue  # header row
                except ValueError:
                    pass
            token, values = parts[0], parts[1:]
            if len(values) != expected_dim:
                raise EmbeddingFormatError(
                    f"{path}:{lineno}: expected {expected_dim} values, got {len(values)}")
            if token not in entries:
                entries[token] = np.array([float(v) for v in values])
    return EmbeddingTable(dim=expected_dim, entries=entries,
                          salt=salt or str(path))


def embed(tables, token):
    """Concatenate the token's vector from each table (dim1 + dim2 total)."""
    first, second = tables
    return np.concatenate([first.lookup(token), second.lookup(token)])


@dataclass
class Lexicon:
    """The two frozen embedding tables the models read from."""

    first: EmbeddingTable
    second: EmbeddingTable

    @property
    def dim(self):
        return self.first.dim + self.second.dim

    @classmethod
    def synthetic(cls, dim):
        """Hash-only tables summing to ``dim`` (used by tests and fixtures)."""
        d1 = dim // 2
        return cls(EmbeddingTable.synthetic(d1, salt="glove-syn"),
                   EmbeddingTable.synthetic(dim - d1, salt="fasttext-syn"))

    def embed_token(self, token):
        return embed((self.first, self.second), token)

    def embed_tokens(self, tokens):
        """(T, dim) matrix of token vectors."""
        if not tokens:
            raise ValueError("cannot embed an empty token sequence")
        return np.stack([self.embed_token(t) for t in tokens])

    def embed_text(self, text):
        """Tokenize and embed in one step; empty text is an error."""
        return self.embed_tokens(tokenize(text).tokens)
