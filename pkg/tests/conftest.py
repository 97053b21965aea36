import pytest

from factpipe.config import PipelineConfig, validate
from factpipe.fixtures import write_fixture
from factpipe.pipeline import run_pipeline


def desk_scale_config(wiki, claims, work_dir):
    """Small-but-trainable settings shared by the pipeline-level tests."""
    return validate(PipelineConfig(
        wiki=str(wiki), claims=str(claims), work_dir=str(work_dir),
        glove_dim=8, fasttext_dim=8,
        k=3, ensemble=2, ranker_hidden=6, ranker_epochs=4, ranker_lr=3e-3,
        sentences=5, rte_hidden=6, rte_attn_dim=6, rte_classifier=(24, 24),
        rte_epochs=12, rte_lr=3e-3, seed=2))


@pytest.fixture(scope="session")
def pipeline_workspace(tmp_path_factory):
    """A 12-claim corpus with one completed pipeline run over it."""
    root = tmp_path_factory.mktemp("pipeline-ws")
    wiki, claims = write_fixture(root / "data", entities=12, claims=12,
                                 ambiguity=False)
    cfg = desk_scale_config(wiki, claims, root / "run")
    report = run_pipeline(cfg)
    return cfg, report
