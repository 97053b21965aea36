"""Flat key=value run configuration shared by every pipeline stage.

One file, one key per line, ``#`` comments.  Values are typed by the
matching ``PipelineConfig`` field; lists (seeds, layer widths) are
comma-separated.  Command-line ``--set key=value`` overrides reuse the
same parser, so anything the file can say a flag can say too.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path


class ConfigError(ValueError):
    """Unknown key, unparsable value, or a violated constraint."""


@dataclass
class PipelineConfig:
    # input and artifact paths
    wiki: str = ""                 # line-delimited article dump
    claims: str = ""               # line-delimited labeled claims
    work_dir: str = "artifacts"    # stage outputs and model checkpoints
    glove: str = ""                # word-vector text file; empty -> synthetic
    fasttext: str = ""             # second vector file, concatenated with the first
    glove_dim: int = 300
    fasttext_dim: int = 300

    # document retrieval
    k: int = 7                     # candidate pages kept per mention
    remote_search: bool = False
    search_endpoint: str = ""      # empty -> the backend's default

    # sentence selection
    ensemble: int = 10             # independently seeded ranking models
    ensemble_seeds: tuple = ()     # explicit seeds; empty -> seed..seed+ensemble-1
    ranker_hidden: int = 100
    ranker_epochs: int = 3
    ranker_lr: float = 1e-3
    ranker_negatives: int = 5

    # claim classification
    sentences: int = 5             # evidence sentences the classifier reads
    rte_hidden: int = 100
    rte_attn_dim: int = 0          # 0 -> rte_hidden
    rte_classifier: tuple = (100, 100)
    rte_epochs: int = 30
    rte_lr: float = 1e-3

    # shared
    optimizer: str = "adam"
    seed: int = 0
    jobs: int = 1                  # upper bound on within-stage parallelism

    def ranker_seeds(self):
        """Seeds for the ranking ensemble, one model each."""
        if self.ensemble_seeds:
            return tuple(self.ensemble_seeds)
        return tuple(range(self.seed, self.seed + self.ensemble))


_FIELDS = {f.name: f for f in fields(PipelineConfig)}


def _parse_value(key, raw):
    kind = _FIELDS[key].type
    raw = raw.strip()
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "bool":
            lowered = raw.lower()
            if lowered in ("1", "true", "on", "yes"):
                return True
            if lowered in ("0", "false", "off", "no"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if kind == "tuple":
            if not raw:
                return ()
            return tuple(int(part) for part in raw.split(","))
        return raw  # str
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {exc}") from None


def parse_assignment(line):
    """Split one ``key = value`` line into a typed (key, value) pair."""
    if "=" not in line:
        raise ConfigError(f"expected key=value, got {line!r}")
    key, raw = line.split("=", 1)
    key = key.strip().replace("-", "_")
    if key not in _FIELDS:
        raise ConfigError(f"unknown config key {key!r}")
    return key, _parse_value(key, raw)


def parse_config_text(text, base=None):
    """Parse config file contents on top of ``base`` (default: all defaults)."""
    cfg = base or PipelineConfig()
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            key, value = parse_assignment(line)
        except ConfigError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from None
        setattr(cfg, key, value)
    return cfg


def load_config(path):
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"config file not found: {path}")
    return parse_config_text(path.read_text(encoding="utf-8"))


def apply_overrides(cfg, assignments):
    """Apply ``key=value`` strings (from --set flags) in order."""
    for item in assignments:
        key, value = parse_assignment(item)
        setattr(cfg, key, value)
    return cfg


def validate(cfg):
    """Raise ConfigError on any out-of-range setting; return cfg unchanged."""
    positive = [
        ("k", cfg.k), ("ensemble", cfg.ensemble),
        ("glove_dim", cfg.glove_dim), ("fasttext_dim", cfg.fasttext_dim),
        ("ranker_hidden", cfg.ranker_hidden),
        ("ranker_epochs", cfg.ranker_epochs),
        ("ranker_negatives", cfg.ranker_negatives),
        ("rte_hidden", cfg.rte_hidden), ("rte_epochs", cfg.rte_epochs),
        ("jobs", cfg.jobs),
    ]
    for name, value in positive:
        if value < 1:
            raise ConfigError(f"{name} must be >= 1, got {value}")
    if not 1 <= cfg.sentences <= 5:
        raise ConfigError(f"sentences must be in 1..5, got {cfg.sentences}")
    if cfg.rte_attn_dim < 0:
        raise ConfigError(f"rte_attn_dim must be >= 0, got {cfg.rte_attn_dim}")
    if len(cfg.rte_classifier) != 2 or any(d < 1 for d in cfg.rte_classifier):
        raise ConfigError(f"rte_classifier needs two widths >= 1, "
                          f"got {cfg.rte_classifier}")
    if cfg.optimizer not in ("sgd", "adam"):
        raise ConfigError(f"optimizer must be sgd or adam, got {cfg.optimizer!r}")
    if cfg.ensemble_seeds and len(set(cfg.ensemble_seeds)) != len(cfg.ensemble_seeds):
        raise ConfigError("ensemble_seeds must be distinct")
    if bool(cfg.glove) != bool(cfg.fasttext):
        raise ConfigError("glove and fasttext must be set together "
                          "(or both left empty for synthetic vectors)")
    if cfg.ranker_lr <= 0 or cfg.rte_lr <= 0:
        raise ConfigError("learning rates must be positive")
    return cfg
