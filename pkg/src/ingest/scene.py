import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..config import Config
from ..errors import ConfigurationError
from ..grid.classes import ClassTable
from ..utils.rng import keyed_rng
from .cloud import EgoPose, LabeledCloud, yaw_rotation

logger = logging.getLogger(__name__)

# stream keys under the scene seed
_LAYOUT_STREAM = 0
_FRAME_STREAM = 1


@dataclass(frozen=True)
class BoxSpec:
    count: int = 0
    size_min: tuple = (1.0, 1.0, 1.0)
    size_max: tuple = (1.0, 1.0, 1.0)
    speed_min: float = 0.0
    speed_max: float = 0.0


@dataclass(frozen=True)
class CylinderSpec:
    count: int = 0
    radius_min: float = 0.3
    radius_max: float = 0.3
    height_min: float = 1.7
    height_max: float = 1.7
    speed_min: float = 0.0
    speed_max: float = 0.0


def _check_range(name, low, high):
    low, high = np.atleast_1d(low), np.atleast_1d(high)
    if np.any(low <= 0) or np.any(high < low):
        raise ConfigurationError(f"{name} range must be positive with min <= max")


@dataclass(frozen=True)
class SceneParams:
    """Procedural scene description: static buildings, moving cars and pedestrians"""

    rng_seed: int = 42
    n_frames: int = 40
    frame_interval: float = 0.5
    ego_speed: float = 5.0
    ego_heading: float = 0.0
    point_density: float = 50.0
    ground: bool = True
    ground_half_extent: float = 25.0
    road_half_width: float = 4.0
    spawn_region: dict = field(default_factory=lambda: {'x': (-20.0, 40.0), 'y': (-20.0, 20.0)})
    buildings: BoxSpec = BoxSpec()
    cars: BoxSpec = BoxSpec()
    pedestrians: CylinderSpec = CylinderSpec()

    def __post_init__(self):
        if int(self.n_frames) < 1:
            raise ConfigurationError("a scene needs at least one frame")
        if self.point_density <= 0 or self.frame_interval <= 0 or self.ground_half_extent <= 0:
            raise ConfigurationError("density, frame interval and ground extent must be positive")
        for name, spec in (('buildings', self.buildings), ('cars', self.cars)):
            if spec.count < 0:
                raise ConfigurationError(f"{name} count must be nonnegative")
            _check_range(f"{name} size", spec.size_min, spec.size_max)
            if spec.speed_min < 0 or spec.speed_max < spec.speed_min:
                raise ConfigurationError(f"{name} speed range is invalid")
        peds = self.pedestrians
        if peds.count < 0:
            raise ConfigurationError("pedestrians count must be nonnegative")
        _check_range("pedestrian radius", peds.radius_min, peds.radius_max)
        _check_range("pedestrian height", peds.height_min, peds.height_max)
        if peds.speed_min < 0 or peds.speed_max < peds.speed_min:
            raise ConfigurationError("pedestrians speed range is invalid")
        for axis in ('x', 'y'):
            low, high = self.spawn_region[axis]
            if high <= low:
                raise ConfigurationError(f"spawn_region.{axis} must have min < max")

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        try:
            if 'buildings' in data:
                data['buildings'] = BoxSpec(**_tupled(data['buildings']))
            if 'cars' in data:
                data['cars'] = BoxSpec(**_tupled(data['cars']))
            if 'pedestrians' in data:
                data['pedestrians'] = CylinderSpec(**data['pedestrians'])
            if 'spawn_region' in data:
                data['spawn_region'] = {k: tuple(v) for k, v in data['spawn_region'].items()}
            return cls(**data)
        except TypeError as e:
            raise ConfigurationError(f"bad scene parameters: {e}") from e

    @classmethod
    def from_config(cls, config=None):
        return cls.from_dict((config or Config()).scene)

    def to_dict(self):
        def _plain(spec):
            return {k: list(v) if isinstance(v, tuple) else v for k, v in spec.__dict__.items()}
        data = {k: v for k, v in self.__dict__.items()
                if k not in ('buildings', 'cars', 'pedestrians', 'spawn_region')}
        data['spawn_region'] = {k: list(v) for k, v in self.spawn_region.items()}
        data['buildings'] = _plain(self.buildings)
        data['cars'] = _plain(self.cars)
        data['pedestrians'] = _plain(self.pedestrians)
        return data


def _tupled(data):
    return {k: tuple(v) if isinstance(v, list) else v for k, v in data.items()}


@dataclass(frozen=True)
class ObjectRecord:
    """World-frame geometry of one object in one frame.

    Boxes rest on the ground: `center` is the footprint center at z = 0 and
    `size` is (length, width, height) along the object's heading. Cylinders
    use `radius` and `size[2]` for height.
    """

    kind: str
    class_id: int
    center: tuple
    size: tuple
    heading: float
    radius: float = 0.0

    def to_local(self, points):
        """World points into the object frame (origin at the footprint center)"""
        return (np.asarray(points) - np.array(self.center)) @ yaw_rotation(self.heading)


@dataclass
class Scene:
    """Output of gen_scene; `objects[t]` lists the geometry emitted in frame t"""

    clouds: list
    poses: list
    classes: ClassTable
    objects: list

    def __iter__(self):
        # (clouds, poses, classes) unpacking
        return iter((self.clouds, self.poses, self.classes))


class _Actor:
    def __init__(self, kind, class_id, position, size, heading, speed, radius=0.0):
        self.kind = kind
        self.class_id = class_id
        self.position = np.asarray(position, dtype=np.float64)
        self.size = tuple(float(v) for v in size)
        self.heading = float(heading)
        self.speed = float(speed)
        self.radius = float(radius)

    def at(self, time):
        direction = np.array([np.cos(self.heading), np.sin(self.heading), 0.0])
        center = self.position + self.speed * time * direction
        return ObjectRecord(self.kind, self.class_id, tuple(center), self.size,
                            self.heading, self.radius)


class SceneGenerator:
    """Samples labeled surface points from a procedural street scene"""

    def __init__(self, params=None, classes=None, workers=1):
        self.params = params or SceneParams.from_config()
        self.classes = classes or ClassTable.load('synthetic')
        self.workers = max(1, int(workers))
        self.ids = {name: self.classes.index(name)
                    for name in ('ground', 'building', 'vehicle', 'pedestrian')}

    def _layout(self):
        p = self.params
        rng = keyed_rng(p.rng_seed, _LAYOUT_STREAM)
        (x_lo, x_hi), (y_lo, y_hi) = p.spawn_region['x'], p.spawn_region['y']
        actors = []

        for _ in range(p.buildings.count):
            size = rng.uniform(p.buildings.size_min, p.buildings.size_max)
            for _attempt in range(100):
                position = (rng.uniform(x_lo, x_hi), rng.uniform(y_lo, y_hi), 0.0)
                if abs(position[1]) >= p.road_half_width + size[1] / 2.0:
                    break
            actors.append(_Actor('building', self.ids['building'], position, size, 0.0, 0.0))

        road_lo, road_hi = max(y_lo, -p.road_half_width), min(y_hi, p.road_half_width)
        if road_hi <= road_lo:
            road_lo, road_hi = y_lo, y_hi
        for _ in range(p.cars.count):
            size = rng.uniform(p.cars.size_min, p.cars.size_max)
            heading = np.pi * rng.integers(2)
            speed = rng.uniform(p.cars.speed_min, p.cars.speed_max)
            position = (rng.uniform(x_lo, x_hi), rng.uniform(road_lo, road_hi), 0.0)
            actors.append(_Actor('car', self.ids['vehicle'], position, size, heading, speed))

        peds = p.pedestrians
        for _ in range(peds.count):
            radius = rng.uniform(peds.radius_min, peds.radius_max)
            height = rng.uniform(peds.height_min, peds.height_max)
            heading = rng.uniform(0.0, 2.0 * np.pi)
            speed = rng.uniform(peds.speed_min, peds.speed_max)
            position = (rng.uniform(x_lo, x_hi), rng.uniform(y_lo, y_hi), 0.0)
            actors.append(_Actor('pedestrian', self.ids['pedestrian'], position,
                                 (2 * radius, 2 * radius, height), heading, speed, radius))
        return actors

    def ego_pose(self, frame_id):
        p = self.params
        distance = p.ego_speed * frame_id * p.frame_interval
        translation = (distance * np.cos(p.ego_heading), distance * np.sin(p.ego_heading), 0.0)
        return EgoPose(frame_id, translation, p.ego_heading)

    def _sample_box(self, rng, record):
        length, width, height = record.size
        hl, hw = length / 2.0, width / 2.0
        density = self.params.point_density
        chunks = []
        # top, then the four sides as (fixed axis, fixed value, face area)
        faces = [('z', height, length * width),
                 ('x', -hl, width * height), ('x', hl, width * height),
                 ('y', -hw, length * height), ('y', hw, length * height)]
        for axis, value, area in faces:
            n = rng.poisson(density * area)
            pts = np.column_stack([rng.uniform(-hl, hl, n), rng.uniform(-hw, hw, n),
                                   rng.uniform(0.0, height, n)])
            pts[:, 'xyz'.index(axis)] = value
            chunks.append(pts)
        return np.concatenate(chunks)

    def _sample_cylinder(self, rng, record):
        r, height = record.radius, record.size[2]
        density = self.params.point_density
        n_side = rng.poisson(density * 2.0 * np.pi * r * height)
        theta = rng.uniform(0.0, 2.0 * np.pi, n_side)
        side = np.column_stack([r * np.cos(theta), r * np.sin(theta),
                                rng.uniform(0.0, height, n_side)])
        n_top = rng.poisson(density * np.pi * r * r)
        rho = r * np.sqrt(rng.uniform(0.0, 1.0, n_top))
        phi = rng.uniform(0.0, 2.0 * np.pi, n_top)
        top = np.column_stack([rho * np.cos(phi), rho * np.sin(phi), np.full(n_top, height)])
        return np.concatenate([side, top])

    def _frame(self, frame_id, actors):
        p = self.params
        rng = keyed_rng(p.rng_seed, _FRAME_STREAM, frame_id)
        pose = self.ego_pose(frame_id)
        time = frame_id * p.frame_interval
        points, labels, records = [], [], []

        if p.ground:
            a = p.ground_half_extent
            n = rng.poisson(p.point_density * (2.0 * a) ** 2)
            local = np.column_stack([rng.uniform(-a, a, n), rng.uniform(-a, a, n), np.zeros(n)])
            points.append(local @ pose.rotation().T + np.array(pose.translation))
            labels.append(np.full(n, self.ids['ground']))

        for actor in actors:
            record = actor.at(time)
            records.append(record)
            if record.kind == 'pedestrian':
                local = self._sample_cylinder(rng, record)
            else:
                local = self._sample_box(rng, record)
            points.append(local @ yaw_rotation(record.heading).T + np.array(record.center))
            labels.append(np.full(len(local), record.class_id))

        world = np.concatenate(points) if points else np.empty((0, 3))
        label_arr = np.concatenate(labels) if labels else np.empty(0, dtype=np.uint16)
        cloud = LabeledCloud(pose.from_world(world), label_arr, frame_id)
        return cloud, pose, records

    def generate(self):
        actors = self._layout()
        frame_ids = range(int(self.params.n_frames))
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            frames = list(pool.map(lambda t: self._frame(t, actors), frame_ids))
        clouds = [f[0] for f in frames]
        logger.info("Generated %d frames, %d points total, %d objects",
                    len(clouds), sum(len(c) for c in clouds), len(actors))
        return Scene(clouds, [f[1] for f in frames], self.classes, [f[2] for f in frames])


def gen_scene(params=None, classes=None, workers=1):
    """Deterministic synthetic scene for `params`; unpacks as (clouds, poses, classes)"""
    return SceneGenerator(params, classes, workers).generate()
