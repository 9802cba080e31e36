import numpy as np
import pytest

from turbofdm.framing import FrameConfig


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def toy_cfg():
    """Small enhanced frame: lp=64, lh=3 (lhr=5, lcp=4), ld=256, ld2=236."""
    return FrameConfig(
        lp=64, lh=3, ld=256, buffer_len=2, lo=16, rate="1/2", diversity=1, ip=4
    )

