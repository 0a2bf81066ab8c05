from pathlib import Path

import numpy as np
import pytest

from trlg import embedder
from trlg.chaos import generate_keychain
from trlg.gaopt import GaConfig
from trlg.imagecore import load_image, luminance

DATA = Path(__file__).parent / "data"
FAST_GA = GaConfig(population=12, generations=8)


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def lena():
    return load_image(DATA / "lena.png")


@pytest.fixture(scope="session")
def lena_gray(lena):
    return luminance(lena)


@pytest.fixture(scope="session")
def keys():
    return generate_keychain(11)


@pytest.fixture(scope="session")
def small_color(lena):
    # 128x128 crop around the face; one threshold tile
    return np.ascontiguousarray(lena[224:352, 224:352])


@pytest.fixture(scope="session")
def small_gray(lena_gray):
    return np.ascontiguousarray(lena_gray[192:320, 192:320])


@pytest.fixture(scope="session")
def wm_gray(small_gray, keys):
    return embedder.embed(small_gray, keys, ga_cfg=FAST_GA, threshold_cfg=FAST_GA)


@pytest.fixture(scope="session")
def wm_color(small_color, keys):
    return embedder.embed(small_color, keys, ga_cfg=FAST_GA, threshold_cfg=FAST_GA)
