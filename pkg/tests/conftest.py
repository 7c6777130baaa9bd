import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from catvec import EmbeddingStore

# The running example: a two-term document against a four-term centroid,
# with a tiny 2-d embedding where president/prez sit at cosine 0.8 and
# trump/prez at exactly 0.6.
DOC_WEIGHTS = {"trump": 0.67, "prez": 0.51}
CENTROID_WEIGHTS = {"trump": 0.10, "president": 0.44, "prez": 0.05, "government": 0.31}
TOY_VECTORS = {
    "trump": [0.0, 1.0],
    "president": [1.0, 0.0],
    "prez": [0.8, 0.6],
    "government": [-1.0, 0.0],
}


@pytest.fixture
def toy_store() -> EmbeddingStore:
    return EmbeddingStore.from_vectors(TOY_VECTORS)
