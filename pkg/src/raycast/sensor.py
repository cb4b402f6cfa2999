import logging
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np
import yaml

from ..config import Config, DATA_DIR
from ..errors import ConfigurationError
from ..utils.io_utils import write_yaml

logger = logging.getLogger(__name__)

PLACEMENTS_FILE = DATA_DIR / 'placements.yaml'
BASELINE_NAMES = ('Center', 'Line', 'Pyramid', 'Square', 'Trapezoid', 'Line-roll', 'Pyramid-roll')


@dataclass(frozen=True)
class LidarSpec:
    """Spinning LiDAR model shared by every sensor of a placement"""

    channels: int = 16
    range_max: float = 100.0
    fov_upper: float = 2.0
    fov_lower: float = -24.8
    fov_horizontal: float = 360.0
    points_per_second_per_channel: int = 5000
    rotation_hz: float = 20.0

    def __post_init__(self):
        if int(self.channels) < 1:
            raise ConfigurationError("a LiDAR needs at least one channel")
        if not self.range_max > 0:
            raise ConfigurationError("range_max must be positive")
        if not self.fov_lower < self.fov_upper:
            raise ConfigurationError("fov_lower must be below fov_upper")
        if not 0 < self.fov_horizontal <= 360.0:
            raise ConfigurationError("fov_horizontal must lie in (0, 360]")
        if not self.rotation_hz > 0:
            raise ConfigurationError("rotation_hz must be positive")
        steps = self.points_per_second_per_channel / self.rotation_hz
        if steps < 1 or abs(steps - round(steps)) > 1e-9 * steps:
            raise ConfigurationError(
                f"points per second per channel / rotation_hz = {steps} is not a positive integer")

    @property
    def azimuth_steps(self):
        return int(round(self.points_per_second_per_channel / self.rotation_hz))

    @property
    def rays_per_frame(self):
        return int(self.channels) * self.azimuth_steps

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown sensor keys: {', '.join(sorted(unknown))}")
        return cls(**data)

    @classmethod
    def from_config(cls, config=None):
        return cls.from_dict((config or Config()).sensor)

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class LidarExtrinsic:
    """Mounting pose in the ego frame: x forward, y left, z up; roll about x in radians"""

    x: float
    y: float
    z: float
    roll: float = 0.0

    def __post_init__(self):
        if not np.all(np.isfinite([self.x, self.y, self.z, self.roll])):
            raise ConfigurationError(f"non-finite LiDAR extrinsic {self}")

    @property
    def position(self):
        return np.array([self.x, self.y, self.z])

    def as_list(self):
        return [float(self.x), float(self.y), float(self.z), float(self.roll)]


class Placement:
    """A named set of LiDAR extrinsics sharing one LidarSpec"""

    def __init__(self, lidars, spec=None, name='placement'):
        lidars = [ext if isinstance(ext, LidarExtrinsic) else LidarExtrinsic(*ext)
                  for ext in lidars]
        if not lidars:
            raise ConfigurationError("a placement needs at least one LiDAR")
        self.lidars = lidars
        self.spec = spec or LidarSpec.from_config()
        self.name = name

    def __len__(self):
        return len(self.lidars)

    def __repr__(self):
        return f"Placement({self.name!r}, {len(self)} lidars)"

    def to_vector(self):
        """Flat [x, y, z, roll] * n vector used by the optimizer"""
        return np.array([v for ext in self.lidars for v in ext.as_list()])

    @classmethod
    def from_vector(cls, u, spec=None, name='placement'):
        u = np.asarray(u, dtype=np.float64)
        if u.ndim != 1 or len(u) % 4:
            raise ConfigurationError(f"placement vector length {u.shape} is not a multiple of 4")
        return cls([LidarExtrinsic(*row) for row in u.reshape(-1, 4)], spec, name)

    def without(self, index):
        return Placement(self.lidars[:index] + self.lidars[index + 1:], self.spec, self.name)

    def to_dict(self, include_spec=True):
        data = {'name': self.name, 'lidars': [ext.as_list() for ext in self.lidars]}
        if include_spec:
            data['sensor'] = self.spec.to_dict()
        return data

    @classmethod
    def from_dict(cls, data, spec=None, name=None):
        if 'lidars' not in data:
            raise ConfigurationError("placement data lacks 'lidars'")
        try:
            rows = [tuple(float(v) for v in row) for row in data['lidars']]
        except (TypeError, ValueError) as e:
            raise ConfigurationError(f"malformed lidars list: {e}") from e
        if any(len(row) != 4 for row in rows):
            raise ConfigurationError("each LiDAR row must be [x, y, z, roll]")
        if 'sensor' in data and spec is None:
            spec = LidarSpec.from_dict(data['sensor'])
        return cls(rows, spec, name or data.get('name', 'placement'))


def load_placement(path, spec=None):
    path = Path(path)
    try:
        with open(path, 'r') as f:
            data = yaml.safe_load(f) or {}
    except (OSError, yaml.YAMLError) as e:
        raise ConfigurationError(f"cannot read placement file {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigurationError(f"placement file {path} must hold a mapping")
    return Placement.from_dict(data, spec, data.get('name', path.stem))


def save_placement(placement, path):
    return write_yaml(path, placement.to_dict())


def load_placement_group(group='baselines', spec=None, path=None):
    """Named placements from the bundled table, in file order"""
    path = path or PLACEMENTS_FILE
    with open(path, 'r') as f:
        groups = yaml.safe_load(f) or {}
    if group not in groups:
        raise ConfigurationError(f"no placement group {group!r} in {path}")
    return [Placement(rows, spec, name) for name, rows in groups[group].items()]


def load_baselines(spec=None):
    """The seven fixed baseline placements"""
    return load_placement_group('baselines', spec)
