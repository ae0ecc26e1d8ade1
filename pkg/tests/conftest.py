"""Shared fixtures: bundled-asset config and a process-wide rasterizer."""

import numpy as np
import pytest

from ste_forge.data_model import GenConfig
from ste_forge.text_render import default_rasterizer


@pytest.fixture(scope="session")
def rasterizer():
    return default_rasterizer()


@pytest.fixture()
def gen_config():
    # Bundled fonts/backgrounds/lexicon; small canvas keeps render tests fast.
    return GenConfig(canvas=(48, 160), master_seed=11)


@pytest.fixture()
def rng():
    return np.random.default_rng(0)
