import numpy as np
import pytest

from src.config import Config
from src.grid import ClassTable, PSog, RoiGrid, finalize
from src.ingest import PsogBuilder, SceneParams, gen_scene
from src.raycast import LidarSpec


@pytest.fixture(autouse=True)
def fresh_config(monkeypatch):
    """Every test starts from the bundled config.yaml"""
    monkeypatch.delenv('SOGPLACE_THREADS', raising=False)
    Config.reset()
    yield Config()
    Config.reset()


@pytest.fixture
def small_grid():
    """4 x 4 x 4 grid of 1 m voxels with its minimum corner at (-2, -2, 0)"""
    return RoiGrid.create((4.0, 4.0, 4.0), (1.0, 1.0, 1.0), (-2.0, -2.0, 0.0))


@pytest.fixture
def desk_grid():
    """16 x 16 x 4 m grid of 0.5 m voxels around the ego"""
    return RoiGrid.create((16.0, 16.0, 4.0), (0.5, 0.5, 0.5), (-8.0, -8.0, -0.5))


@pytest.fixture
def binary_classes():
    return ClassTable(('empty', 'car'), 0)


@pytest.fixture
def synthetic_classes():
    return ClassTable.load('synthetic')


@pytest.fixture
def small_spec():
    """4 channels x 20 azimuth steps"""
    return LidarSpec(channels=4, range_max=20.0, fov_upper=10.0, fov_lower=-30.0,
                     fov_horizontal=360.0, points_per_second_per_channel=400, rotation_hz=20.0)


def desk_scene_params(**overrides):
    params = dict(
        rng_seed=7, n_frames=3, frame_interval=0.5, ego_speed=0.0, point_density=20.0,
        ground_half_extent=9.0, road_half_width=2.0,
        spawn_region={'x': (-7.0, 7.0), 'y': (-7.0, 7.0)},
        buildings={'count': 1, 'size_min': (2.0, 2.0, 2.0), 'size_max': (3.0, 3.0, 3.0)},
        cars={'count': 2, 'size_min': (3.8, 1.7, 1.4), 'size_max': (4.5, 1.9, 1.6),
              'speed_min': 0.0, 'speed_max': 2.0},
        pedestrians={'count': 2, 'radius_min': 0.25, 'radius_max': 0.3,
                     'height_min': 1.6, 'height_max': 1.8, 'speed_min': 0.0, 'speed_max': 1.0},
    )
    params.update(overrides)
    return SceneParams.from_dict(params)


@pytest.fixture
def desk_scene(synthetic_classes):
    return gen_scene(desk_scene_params(), synthetic_classes)


@pytest.fixture
def desk_psog(desk_grid, desk_scene):
    return PsogBuilder(desk_grid, window=2).build(desk_scene.clouds, desk_scene.poses,
                                                  desk_scene.classes)


@pytest.fixture
def desk_prob(desk_psog):
    return finalize(desk_psog)


def random_prob_rows(rng, n, m):
    """n random probability vectors over m classes"""
    raw = rng.gamma(0.5, size=(n, m))
    return raw / raw.sum(axis=1, keepdims=True)


@pytest.fixture
def make_psog():
    def _make(grid, classes, counts, frames_seen):
        return PSog(grid, classes, np.asarray(counts, dtype=np.uint32), frames_seen)
    return _make
