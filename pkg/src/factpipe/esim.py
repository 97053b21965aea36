"""The shared ESIM encoder: input encoding, local inference, composition.

``encode_pair`` turns a (claim, sentence) pair of embedding matrices into
a single final hidden vector of length 8h plus the per-token input
encodings both downstream models read.  One BiLSTM parameter set per
stage is shared between the two statements.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import ShapeError, Tensor, bilstm_encode, concat, dropout, pool_avg_max


@dataclass
class EsimConfig:
    embed_dim: int
    hidden: int = 100            # hidden size is a config value, not a claim
    projection_dim: int | None = None   # optional input projection
    dropout: float = 0.0
    identity_encoding: bool = False     # test mode: both BiLSTMs become identity

    @property
    def enc_input_dim(self):
        return self.projection_dim if self.projection_dim else self.embed_dim

    @property
    def final_dim(self):
        return 8 * self.hidden


@dataclass
class PairEncoding:
    """Outputs of one claim-sentence ESIM run."""

    final_hidden: Tensor            # (8h,)
    claim_token_encodings: Tensor   # (Tc, 2h)
    sentence_token_encodings: Tensor  # (Ts, 2h)


def _add_lstm(ps, name, in_dim, hidden):
    w = ps.add(f"{name}.w", (in_dim + hidden, 4 * hidden), fan=hidden)
    b = ps.add(f"{name}.b", (4 * hidden,), init="zeros")
    b.data[hidden:2 * hidden] = 1.0  # forget-gate offset
    return w, b


def init_esim(ps, cfg, prefix="esim."):
    """Register all encoder parameters on ``ps`` under ``prefix``."""
    h = cfg.hidden
    if cfg.identity_encoding:
        if cfg.enc_input_dim != 2 * h:
            raise ShapeError(
                f"identity encoding needs embed dim {2 * h}, got {cfg.enc_input_dim}")
    if cfg.projection_dim:
        ps.add(f"{prefix}embed_proj.w", (cfg.embed_dim, cfg.projection_dim),
               fan=cfg.embed_dim)
        ps.add(f"{prefix}embed_proj.b", (cfg.projection_dim,), init="zeros")
    if not cfg.identity_encoding:
        _add_lstm(ps, f"{prefix}enc.fwd", cfg.enc_input_dim, h)
        _add_lstm(ps, f"{prefix}enc.bwd", cfg.enc_input_dim, h)
    ps.add(f"{prefix}proj.w", (8 * h, 2 * h), fan=8 * h)
    ps.add(f"{prefix}proj.b", (2 * h,), init="zeros")
    if not cfg.identity_encoding:
        _add_lstm(ps, f"{prefix}comp.fwd", 2 * h, h)
        _add_lstm(ps, f"{prefix}comp.bwd", 2 * h, h)
    return ps


def stash_config(ps, cfg, **extra):
    """Record architecture scalars as 0-d checkpoint entries.

    The entries never join a computation graph, so their gradients stay
    zero and optimizers leave them alone; they exist so a checkpoint can
    be loaded without a sidecar config file.
    """
    ps.add("meta.embed_dim", (), init="value", value=float(cfg.embed_dim))
    ps.add("meta.hidden", (), init="value", value=float(cfg.hidden))
    ps.add("meta.projection_dim", (), init="value",
           value=float(cfg.projection_dim or 0))
    ps.add("meta.dropout", (), init="value", value=float(cfg.dropout))
    ps.add("meta.identity_encoding", (), init="value",
           value=float(1 if cfg.identity_encoding else 0))
    for key, value in extra.items():
        ps.add(f"meta.{key}", (), init="value", value=float(value))


_CORE_META = {"embed_dim", "hidden", "projection_dim", "dropout",
              "identity_encoding"}


def unstash_config(ps):
    """Rebuild (EsimConfig, extra scalars) recorded by ``stash_config``."""
    proj = int(ps["meta.projection_dim"].data)
    cfg = EsimConfig(
        embed_dim=int(ps["meta.embed_dim"].data),
        hidden=int(ps["meta.hidden"].data),
        projection_dim=proj if proj > 0 else None,
        dropout=float(ps["meta.dropout"].data),
        identity_encoding=bool(int(ps["meta.identity_encoding"].data)),
    )
    extra = {name[5:]: float(t.data) for name, t in ps.items()
             if name.startswith("meta.") and name[5:] not in _CORE_META}
    return cfg, extra


def local_inference(enc_a, enc_b):
    """Soft cross-statement alignment with enhancement features.

    e[i][j] = enc_a[i] . enc_b[j]; each statement attends over the other
    with row softmax, and the aligned vector joins the original as
    [x; x~; x - x~; x * x~].  Returns (m_a, m_b) of widths 4 times the
    encoding width.
    """
    e = enc_a @ enc_b.T
    attn_a = e.softmax_rows()          # (Ta, Tb), rows sum to 1
    attn_b = e.T.softmax_rows()        # (Tb, Ta)
    a_tilde = attn_a @ enc_b
    b_tilde = attn_b @ enc_a
    m_a = concat([enc_a, a_tilde, enc_a - a_tilde, enc_a * a_tilde], axis=1)
    m_b = concat([enc_b, b_tilde, enc_b - b_tilde, enc_b * b_tilde], axis=1)
    return m_a, m_b


def attention_matrix(enc_a, enc_b):
    """Row-softmax attention of a over b (exposed for algebra tests)."""
    return (enc_a @ enc_b.T).softmax_rows()


def encode_statement(vecs, ps, cfg, prefix="esim.", train=False, rng=None):
    """Input-encoding stage for one statement: (T, d) -> (T, 2h)."""
    x = vecs if isinstance(vecs, Tensor) else Tensor(vecs)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ShapeError(f"statement must be a non-empty (T, d) matrix, got {x.shape}")
    if cfg.projection_dim:
        x = (x @ ps[f"{prefix}embed_proj.w"] + ps[f"{prefix}embed_proj.b"]).relu()
    if cfg.identity_encoding:
        return x
    if train and cfg.dropout > 0:
        x = dropout(x, cfg.dropout, rng)
    return bilstm_encode(x, ps[f"{prefix}enc.fwd.w"], ps[f"{prefix}enc.fwd.b"],
                         ps[f"{prefix}enc.bwd.w"], ps[f"{prefix}enc.bwd.b"])


def _compose(m, ps, cfg, prefix, train, rng):
    f = (m @ ps[f"{prefix}proj.w"] + ps[f"{prefix}proj.b"]).relu()
    if train and cfg.dropout > 0:
        f = dropout(f, cfg.dropout, rng)
    if cfg.identity_encoding:
        return f
    return bilstm_encode(f, ps[f"{prefix}comp.fwd.w"], ps[f"{prefix}comp.fwd.b"],
                         ps[f"{prefix}comp.bwd.w"], ps[f"{prefix}comp.bwd.b"])


def encode_pair(claim_vecs, sent_vecs, ps, cfg, prefix="esim.",
                train=False, rng=None, claim_encoded=None):
    """Full ESIM run over one claim-sentence pair.

    ``claim_encoded`` lets callers reuse the claim's input encoding across
    runs against different sentences (identical under shared parameters).
    """
    enc_a = claim_encoded if claim_encoded is not None else encode_statement(
        claim_vecs, ps, cfg, prefix, train, rng)
    enc_b = encode_statement(sent_vecs, ps, cfg, prefix, train, rng)
    m_a, m_b = local_inference(enc_a, enc_b)
    v_a = _compose(m_a, ps, cfg, prefix, train, rng)
    v_b = _compose(m_b, ps, cfg, prefix, train, rng)
    final = concat([pool_avg_max(v_a), pool_avg_max(v_b)], axis=0)
    return PairEncoding(final_hidden=final,
                        claim_token_encodings=enc_a,
                        sentence_token_encodings=enc_b)
