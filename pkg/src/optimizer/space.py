import logging
from dataclasses import dataclass
from itertools import combinations
from typing import Optional

import numpy as np

from ..config import Config
from ..errors import ConfigurationError

logger = logging.getLogger(__name__)

PARAM_NAMES = ('x', 'y', 'z', 'roll')
_Z = PARAM_NAMES.index('z')


class SearchSpace:
    """Box bounds and delta-grid of the placement vector u.

    For placements, u holds [x, y, z, roll] per LiDAR. In 2D mode the z
    entries are pinned to `fixed_z` and left out of the free vector the
    optimizer samples; `expand` and `reduce` convert between the two.
    """

    def __init__(self, lower, upper, delta, n_lidars=None, two_d=False, fixed_z=None):
        lower = np.asarray(lower, dtype=np.float64).ravel()
        upper = np.asarray(upper, dtype=np.float64).ravel()
        if lower.shape != upper.shape or len(lower) == 0:
            raise ConfigurationError("bounds must be non-empty vectors of equal length")
        if not np.all(lower < upper):
            raise ConfigurationError("every lower bound must be below its upper bound")
        widths = upper - lower
        if not delta > 0 or np.any(delta >= widths):
            raise ConfigurationError(f"delta {delta} must be positive and below every width")
        if n_lidars is not None and len(lower) != 4 * n_lidars:
            raise ConfigurationError(f"{n_lidars} lidars need {4 * n_lidars} bounds")
        if two_d and n_lidars is None:
            raise ConfigurationError("2D mode needs a placement space")

        self.full_lower = lower
        self.full_upper = upper
        self.delta = float(delta)
        self.n_lidars = n_lidars
        self.two_d = bool(two_d)
        self.free_mask = np.ones(len(lower), dtype=bool)
        self.fixed_z = None
        if self.two_d:
            self.fixed_z = float(lower[_Z] if fixed_z is None else fixed_z)
            self.free_mask[_Z::4] = False

    @classmethod
    def for_lidars(cls, n_lidars, bounds, delta, two_d=False, fixed_z=None):
        """Same per-LiDAR bounds for every sensor, e.g. bounds={'x': (-0.6, 0.6), ...}"""
        try:
            per_lidar = [bounds[name] for name in PARAM_NAMES]
        except KeyError as e:
            raise ConfigurationError(f"bounds lack {e}") from e
        lower = np.tile([float(b[0]) for b in per_lidar], n_lidars)
        upper = np.tile([float(b[1]) for b in per_lidar], n_lidars)
        return cls(lower, upper, delta, n_lidars, two_d, fixed_z)

    @classmethod
    def from_config(cls, config=None):
        section = (config or Config()).optimizer
        return cls.for_lidars(int(section['n_lidars']), section['bounds'], float(section['delta']),
                              bool(section.get('two_d', False)), section.get('fixed_z'))

    @property
    def full_dim(self):
        return len(self.full_lower)

    @property
    def dim(self):
        return int(self.free_mask.sum())

    @property
    def lower(self):
        return self.full_lower[self.free_mask]

    @property
    def upper(self):
        return self.full_upper[self.free_mask]

    @property
    def widths(self):
        return self.upper - self.lower

    def center(self):
        return (self.lower + self.upper) / 2.0

    def clamp(self, x):
        return np.clip(x, self.lower, self.upper)

    def snap(self, x):
        """Nearest delta-grid point (anchored at the lower bounds), clamped into the box"""
        x = np.asarray(x, dtype=np.float64)
        snapped = self.lower + np.round((x - self.lower) / self.delta) * self.delta
        return self.clamp(snapped)

    def expand(self, x):
        """Free vector -> full placement vector"""
        x = np.asarray(x, dtype=np.float64)
        if not self.two_d:
            return x.copy()
        full = np.empty(x.shape[:-1] + (self.full_dim,))
        full[..., self.free_mask] = x
        full[..., ~self.free_mask] = self.fixed_z
        return full

    def reduce(self, u):
        """Full placement vector -> free vector"""
        return np.asarray(u, dtype=np.float64)[..., self.free_mask]

    def box_violation(self, u):
        """Summed distance of the free coordinates of u outside the box"""
        x = self.reduce(u)
        return float(np.sum(np.maximum(0.0, self.lower - x) + np.maximum(0.0, x - self.upper)))


@dataclass(frozen=True)
class ConstraintSpec:
    min_mutual_distance: float = 0.15
    lam: Optional[float] = None

    def __post_init__(self):
        if not self.min_mutual_distance >= 0:
            raise ConfigurationError("min_mutual_distance must be >= 0")
        if self.lam is not None and not self.lam >= 0:
            raise ConfigurationError("lambda must be >= 0")

    @classmethod
    def from_config(cls, config=None):
        section = (config or Config()).optimizer
        lam = section.get('lambda')
        return cls(float(section.get('min_mutual_distance', 0.15)),
                   None if lam is None else float(lam))

    def with_lambda(self, lam):
        return ConstraintSpec(self.min_mutual_distance, float(lam))


def penalty(u, cs, space):
    """Pairwise separation shortfall plus box violation; 0 iff u is feasible"""
    u = np.asarray(u, dtype=np.float64)
    if u.shape != (space.full_dim,):
        raise ConfigurationError(f"expected a {space.full_dim}-vector, got {u.shape}")
    total = space.box_violation(u)
    if space.n_lidars and cs.min_mutual_distance > 0:
        positions = u.reshape(-1, 4)[:, :3]
        for i, j in combinations(range(len(positions)), 2):
            gap = cs.min_mutual_distance - np.linalg.norm(positions[i] - positions[j])
            if gap > 0:
                total += gap
    return float(total)
