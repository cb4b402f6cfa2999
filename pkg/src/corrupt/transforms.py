"""Simplified adverse-condition corruptions for labeled point clouds.

Physical fidelity is not attempted: fog is range attenuation without a
back-scatter term, and wet ground and snow are not modelled.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from ..config import Config
from ..errors import ConfigurationError
from ..utils.rng import keyed_rng

logger = logging.getLogger(__name__)

KINDS = ('motion_blur', 'crosstalk', 'incomplete_echo', 'fog')

# the primary parameter of each kind, as written in `kind=value` specs
PRIMARY_PARAM = {
    'motion_blur': 'sigma',
    'crosstalk': 'ratio',
    'incomplete_echo': 'drop',
    'fog': 'attenuation',
}

FOG_ATTENUATIONS = (0.0, 0.005, 0.01, 0.02, 0.03, 0.06)

# per-kind stream key so two kinds with one seed never share draws
_KIND_STREAM = {kind: i for i, kind in enumerate(KINDS)}


@dataclass(frozen=True)
class CorruptionSpec:
    kind: str
    params: dict = field(default_factory=dict)
    rng_seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown corruption {self.kind!r}; known: {', '.join(KINDS)}")
        p = self.params
        if self.kind == 'motion_blur' and not p.get('sigma', 0.0) >= 0:
            raise ConfigurationError("motion_blur sigma must be >= 0")
        if self.kind == 'crosstalk':
            if not 0.0 <= p.get('ratio', 0.0) <= 1.0:
                raise ConfigurationError("crosstalk ratio must lie in [0, 1]")
            if not p.get('range_max', 1.0) > 0:
                raise ConfigurationError("crosstalk range_max must be positive")
        if self.kind == 'incomplete_echo' and not 0.0 <= p.get('drop', 0.0) <= 1.0:
            raise ConfigurationError("incomplete_echo drop must lie in [0, 1]")
        if self.kind == 'fog' and p.get('attenuation') is not None and not p['attenuation'] >= 0:
            raise ConfigurationError("fog attenuation must be >= 0")

    @classmethod
    def create(cls, kind, value=None, rng_seed=None, config=None):
        """Spec for `kind` with config defaults for every parameter not given"""
        config = config or Config()
        section = config.corruption
        if kind not in KINDS:
            raise ConfigurationError(f"unknown corruption {kind!r}; known: {', '.join(KINDS)}")
        params = dict(section.get(kind) or {})
        if value is not None:
            params[PRIMARY_PARAM[kind]] = value
        seed = section.get('rng_seed', 0) if rng_seed is None else rng_seed
        return cls(kind, params, int(seed))

    @classmethod
    def parse(cls, text, config=None):
        """Parse `kind=value[,seed=N][,key=value...]`, e.g. `fog=0.01,seed=3`"""
        items = [item.strip() for item in text.split(',') if item.strip()]
        if not items:
            raise ConfigurationError("empty corruption spec")
        kind, _, raw = items[0].partition('=')
        value = _number(raw, text) if raw not in ('', 'sample') else None
        seed, extra = None, {}
        for item in items[1:]:
            key, sep, raw = item.partition('=')
            if not sep:
                raise ConfigurationError(f"malformed corruption option {item!r}")
            if key == 'seed':
                seed = int(_number(raw, text))
            else:
                extra[key] = raw if key == 'noise_class' else _number(raw, text)
        spec = cls.create(kind.strip(), value, seed, config)
        if extra:
            spec = cls(spec.kind, {**spec.params, **extra}, spec.rng_seed)
        return spec

    def to_dict(self):
        return {'kind': self.kind, 'params': dict(self.params), 'rng_seed': self.rng_seed}


def _number(raw, text):
    try:
        return float(raw)
    except ValueError:
        raise ConfigurationError(f"non-numeric value {raw!r} in corruption spec {text!r}") from None


def _sphere_points(rng, n, radius):
    direction = rng.standard_normal((n, 3))
    norms = np.linalg.norm(direction, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    r = radius * np.cbrt(rng.uniform(0.0, 1.0, n))
    return direction / norms * r[:, None]


def apply(cloud, spec, classes=None, sensor_origin=(0.0, 0.0, 0.0)):
    """Corrupt one cloud. Draws come from the stream (seed, frame id, kind)"""
    rng = keyed_rng(spec.rng_seed, cloud.frame_id, _KIND_STREAM[spec.kind])
    origin = np.asarray(sensor_origin, dtype=np.float64)
    p = spec.params
    n = len(cloud)

    if spec.kind == 'motion_blur':
        sigma = float(p.get('sigma', 0.0))
        if sigma == 0.0:
            return cloud.with_points(cloud.points.copy())
        return cloud.with_points(cloud.points + rng.normal(0.0, sigma, (n, 3)))

    if spec.kind == 'incomplete_echo':
        keep = rng.uniform(0.0, 1.0, n) >= float(p.get('drop', 0.0))
        return cloud.subset(keep)

    if spec.kind == 'fog':
        attenuation = p.get('attenuation')
        if attenuation is None:
            attenuation = float(rng.choice(FOG_ATTENUATIONS))
            logger.debug("Frame %d: sampled fog attenuation %.3f", cloud.frame_id, attenuation)
        ranges = np.linalg.norm(cloud.points - origin, axis=1)
        keep = rng.uniform(0.0, 1.0, n) < np.exp(-float(attenuation) * ranges)
        return cloud.subset(keep)

    # crosstalk
    noise_class = p.get('noise_class', 'unlabeled')
    if isinstance(noise_class, str):
        if classes is None:
            raise ConfigurationError("crosstalk needs a class table to resolve its noise class")
        noise_class = classes.index(noise_class)
    n_replace = int(round(float(p.get('ratio', 0.0)) * n))
    points, labels = cloud.points.copy(), cloud.labels.copy()
    if n_replace:
        picked = rng.choice(n, size=n_replace, replace=False)
        points[picked] = origin + _sphere_points(rng, n_replace, float(p.get('range_max', 100.0)))
        labels[picked] = noise_class
    return cloud.with_points(points, labels)
