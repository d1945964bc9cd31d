import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gazeseg import synth

A1_SEED = 7
A2_SEED = 2024


@pytest.fixture(scope="session")
def a1_manifest(tmp_path_factory) -> Path:
    """100 clean demos: 3 transitions, jumps >= 150 px, sigma 5, glances."""
    out = tmp_path_factory.mktemp("a1_dataset")
    specs = synth.clean_dataset_specs(100, seed=A1_SEED)
    return synth.generate_dataset(specs, 1, out, task="clean", write_features=False)


@pytest.fixture(scope="session")
def a2_manifest(tmp_path_factory) -> Path:
    """90 clean demos plus 10 whose spikes sit at 0.7x the default threshold."""
    out = tmp_path_factory.mktemp("a2_dataset")
    specs = synth.heterogeneous_dataset_specs(A2_SEED)
    return synth.generate_dataset(specs, 1, out, task="heterogeneous", write_features=True)
