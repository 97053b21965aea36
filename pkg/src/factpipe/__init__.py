"""factpipe: claim verification over an article corpus.

Stages: entity-linking document retrieval, ESIM-based sentence ranking,
multi-evidence entailment classification, and FEVER-style scoring.
"""

__version__ = "0.1.0"
