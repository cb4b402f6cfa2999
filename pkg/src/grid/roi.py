import logging
from dataclasses import dataclass

import numpy as np

from ..config import Config
from ..errors import ConfigurationError

logger = logging.getLogger(__name__)

# Relative slack allowed when checking that extent / resolution is an integer
_DIVISION_TOL = 1e-9


@dataclass(frozen=True)
class RoiGrid:
    """Ego-centered cuboid split into n_l x n_w x n_h half-open voxels.

    Linear voxel ids run with i_l fastest: id = i_l + n_l * (i_w + n_w * i_h).
    """

    extent_l: float
    extent_w: float
    extent_h: float
    res_l: float
    res_w: float
    res_h: float
    n_l: int
    n_w: int
    n_h: int
    origin: tuple

    def __post_init__(self):
        res = (self.res_l, self.res_w, self.res_h)
        counts = (self.n_l, self.n_w, self.n_h)
        extents = (self.extent_l, self.extent_w, self.extent_h)
        if any(not np.isfinite(r) or r <= 0 for r in res):
            raise ConfigurationError(f"grid resolution must be positive, got {res}")
        if any(int(n) != n or n < 1 for n in counts):
            raise ConfigurationError(f"voxel counts must be positive integers, got {counts}")
        for n, r, e in zip(counts, res, extents):
            if abs(n * r - e) > _DIVISION_TOL * max(1.0, abs(e)):
                raise ConfigurationError(f"extent {e} is not {n} voxels of {r} m")
        if len(self.origin) != 3 or not np.all(np.isfinite(self.origin)):
            raise ConfigurationError(f"grid origin must be a finite 3D point, got {self.origin}")
        object.__setattr__(self, 'origin', tuple(float(v) for v in self.origin))

    @classmethod
    def create(cls, extent, resolution, origin=None):
        """Build a grid from side lengths and voxel sizes; origin defaults to centering on the ego"""
        extent = [float(v) for v in extent]
        resolution = [float(v) for v in resolution]
        if len(extent) != 3 or len(resolution) != 3:
            raise ConfigurationError("extent and resolution need three components")
        if any(r <= 0 for r in resolution):
            raise ConfigurationError(f"grid resolution must be positive, got {resolution}")
        counts = []
        for e, r in zip(extent, resolution):
            n = int(round(e / r))
            if n < 1 or abs(n * r - e) > _DIVISION_TOL * max(1.0, abs(e)):
                raise ConfigurationError(f"extent {e} is not a whole number of {r} m voxels")
            counts.append(n)
        if origin is None:
            origin = (-extent[0] / 2.0, -extent[1] / 2.0, 0.0)
        # stored extents are n * res so grids read back from disk compare equal
        extent = [n * r for n, r in zip(counts, resolution)]
        return cls(*extent, *resolution, *counts, tuple(origin))

    @classmethod
    def from_config(cls, config=None):
        section = (config or Config()).grid
        try:
            return cls.create(section['extent'], section['resolution'], section.get('origin'))
        except (KeyError, TypeError) as e:
            raise ConfigurationError(f"grid section incomplete: {e}") from e

    @property
    def shape(self):
        return (self.n_l, self.n_w, self.n_h)

    @property
    def n_voxels(self):
        return self.n_l * self.n_w * self.n_h

    @property
    def resolution(self):
        return np.array([self.res_l, self.res_w, self.res_h])

    @property
    def extent(self):
        return np.array([self.extent_l, self.extent_w, self.extent_h])

    @property
    def lower(self):
        return np.array(self.origin)

    @property
    def upper(self):
        return self.lower + self.extent

    def voxel_index(self, p):
        """Integer (i_l, i_w, i_h) of the voxel holding p, or None outside the ROI"""
        rel = (np.asarray(p, dtype=np.float64) - self.lower) / self.resolution
        idx = np.floor(rel)
        if np.any(idx < 0) or np.any(idx >= self.shape):
            return None
        return tuple(int(i) for i in idx)

    def voxel_ids(self, points):
        """Linear voxel id per point, -1 for points outside the ROI"""
        points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        idx = np.floor((points - self.lower) / self.resolution)
        inside = np.all((idx >= 0) & (idx < np.array(self.shape)), axis=1)
        ids = np.full(len(points), -1, dtype=np.int64)
        idx = idx[inside].astype(np.int64)
        ids[inside] = self.ravel(idx[:, 0], idx[:, 1], idx[:, 2])
        return ids

    def ravel(self, i_l, i_w, i_h):
        return i_l + self.n_l * (i_w + self.n_w * i_h)

    def unravel(self, ids):
        ids = np.asarray(ids, dtype=np.int64)
        i_l = ids % self.n_l
        i_w = (ids // self.n_l) % self.n_w
        i_h = ids // (self.n_l * self.n_w)
        return i_l, i_w, i_h

    def voxel_bounds(self, voxel_id):
        """(lower corner, upper corner) of one voxel"""
        idx = np.array(self.unravel(voxel_id), dtype=np.float64)
        lo = self.lower + idx * self.resolution
        return lo, lo + self.resolution

    def voxel_centers(self, ids=None):
        if ids is None:
            ids = np.arange(self.n_voxels)
        idx = np.stack(self.unravel(ids), axis=-1).astype(np.float64)
        return self.lower + (idx + 0.5) * self.resolution

    def to_dict(self):
        return {
            'extent': [self.extent_l, self.extent_w, self.extent_h],
            'resolution': [self.res_l, self.res_w, self.res_h],
            'origin': list(self.origin),
        }
