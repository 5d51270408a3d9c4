import numpy as np
import pytest

from topface.pointcloud import PointCloud
from topface.schemas import DenoiserTrainingConfig, RecognizerTrainingConfig


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def cloud(rng):
    """200 points spread over a 100-unit box."""
    return PointCloud(points=rng.uniform(-50, 50, size=(200, 3)), identity=0)


@pytest.fixture
def tiny_recognizer_config():
    return RecognizerTrainingConfig(
        epochs=2, batch=4, k=4, widths=(8, 8), global_width=16, point_budget=48, dropout=0.0
    )


@pytest.fixture
def tiny_denoiser_config():
    return DenoiserTrainingConfig(
        epochs=1,
        batch=2,
        resolution=8,
        channels=(4,),
        vad_channels=(4,),
        rfd_widths=(8,),
        point_budget=48,
    )


@pytest.fixture
def make_blobs(rng):
    """Well-separated labelled clouds: each identity is a tight blob at its own centre."""

    def make(n_identities=2, per_identity=4, n_points=64):
        clouds = []
        for ident in range(n_identities):
            centre = np.array([ident * 60.0 - 30.0, 0.0, 0.0])
            for _ in range(per_identity):
                pts = centre + rng.normal(0.0, 3.0, size=(n_points, 3))
                clouds.append(PointCloud(points=pts, identity=ident))
        return clouds

    return make
