import warnings

import pytest

from mapnav.pipeline import PipelineConfig, run_pipeline


@pytest.fixture(scope="session")
def small_run(tmp_path_factory):
    """One small end-to-end run shared by the integration-level tests."""
    out = tmp_path_factory.mktemp("artifacts")
    cfg = PipelineConfig(
        n_samples=600,
        top_k=6,
        bins_per_variable=5,
        folds=5,
        seed=11,
        sensitivity_base=256,
        output_dir=str(out),
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        result = run_pipeline(cfg)
    return result
