from pathlib import Path

import pytest

from gazeseg import synth


@pytest.fixture(scope="session")
def a2_manifest(tmp_path_factory) -> Path:
    """The heterogeneous 90 clean + 10 attenuated dataset (seed 2024)."""
    out = tmp_path_factory.mktemp("a2_dataset")
    specs = synth.heterogeneous_dataset_specs(2024)
    return synth.generate_dataset(specs, 1, out, task="heterogeneous", write_features=True)
