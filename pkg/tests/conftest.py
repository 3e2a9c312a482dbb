import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make oracles importable

from debandkit import generator as gen
from debandkit.imagebuf import ImageBuffer

FIXTURE_DIR = Path(__file__).parent / "fixtures"

# Fixture weight files are ~218 MB each (the architecture is fixed), so they
# are materialized deterministically on first use and cached, not committed.
ZERO_WEIGHTS = FIXTURE_DIR / "generator-zero-v1.dbw"
SEEDED_WEIGHTS = FIXTURE_DIR / "generator-seed1234-v1.dbw"
SEEDED_WEIGHTS_SEED = 1234


def rand_image(width: int, height: int, seed: int = 0) -> ImageBuffer:
    rng = np.random.default_rng(seed)
    return ImageBuffer(rng.integers(0, 256, (height, width, 3), dtype=np.uint8))


@pytest.fixture(scope="session")
def zero_weights_path() -> Path:
    if not ZERO_WEIGHTS.exists():
        FIXTURE_DIR.mkdir(parents=True, exist_ok=True)
        gen.zero_generator().save(ZERO_WEIGHTS)
    return ZERO_WEIGHTS


@pytest.fixture(scope="session")
def seeded_weights_path() -> Path:
    if not SEEDED_WEIGHTS.exists():
        FIXTURE_DIR.mkdir(parents=True, exist_ok=True)
        gen.seeded_generator(SEEDED_WEIGHTS_SEED, weight_scale=0.02, bias_scale=0.01).save(
            SEEDED_WEIGHTS
        )
    return SEEDED_WEIGHTS


@pytest.fixture(scope="session")
def seeded_model(seeded_weights_path) -> gen.GeneratorModel:
    return gen.load_weights(seeded_weights_path)


@pytest.fixture(scope="session")
def zero_model(zero_weights_path) -> gen.GeneratorModel:
    return gen.load_weights(zero_weights_path)
