import logging
from dataclasses import dataclass

import numpy as np

from ..config import Config
from ..errors import ConfigurationError
from .rays import placement_rays
from .traversal import (chunk_count, coverage_mask_parallel, coverage_mask_serial,
                        grid_arrays)

logger = logging.getLogger(__name__)

KERNELS = {'parallel': coverage_mask_parallel, 'serial': coverage_mask_serial}


@dataclass(frozen=True)
class OcclusionMode:
    """Where a ray stops: 'none' runs to full range, 'threshold' stops after the
    first voxel whose P(non-empty) reaches tau"""

    mode: str = 'threshold'
    tau: float = 0.5

    def __post_init__(self):
        if self.mode not in ('none', 'threshold'):
            raise ConfigurationError(f"unknown occlusion mode {self.mode!r}")
        if self.mode == 'threshold' and not 0.0 <= self.tau <= 1.0:
            raise ConfigurationError(f"occlusion tau must lie in [0, 1], got {self.tau}")

    @classmethod
    def none(cls):
        return cls('none', float('inf'))

    @classmethod
    def threshold(cls, tau=0.5):
        return cls('threshold', float(tau))

    @classmethod
    def parse(cls, text):
        """'none', 'threshold' or 'threshold:<tau>'"""
        text = str(text).strip().lower()
        if text == 'none':
            return cls.none()
        mode, _, tau = text.partition(':')
        if mode != 'threshold':
            raise ConfigurationError(f"unknown occlusion mode {text!r}")
        try:
            return cls.threshold(float(tau) if tau else 0.5)
        except ValueError:
            raise ConfigurationError(f"bad occlusion threshold in {text!r}") from None

    @classmethod
    def from_config(cls, config=None):
        return cls.parse((config or Config()).metric.get('occlusion', 'threshold:0.5'))

    def __str__(self):
        return 'none' if self.mode == 'none' else f"threshold:{self.tau:g}"


class CoverageSet:
    """Sorted unique ids of the voxels a placement's rays reach"""

    def __init__(self, ids, n_voxels):
        ids = np.unique(np.asarray(ids, dtype=np.int64))
        if len(ids) and (ids[0] < 0 or ids[-1] >= n_voxels):
            raise ConfigurationError("coverage ids outside the grid")
        ids.setflags(write=False)
        self.ids = ids
        self.n_voxels = int(n_voxels)

    @classmethod
    def from_mask(cls, mask):
        return cls(np.flatnonzero(mask), len(mask))

    @property
    def n_covered(self):
        return len(self.ids)

    def __len__(self):
        return self.n_covered

    def __eq__(self, other):
        if not isinstance(other, CoverageSet):
            return NotImplemented
        return self.n_voxels == other.n_voxels and np.array_equal(self.ids, other.ids)

    def __repr__(self):
        return f"CoverageSet({self.n_covered}/{self.n_voxels})"

    def mask(self):
        mask = np.zeros(self.n_voxels, dtype=bool)
        mask[self.ids] = True
        return mask

    def union(self, other):
        return CoverageSet(np.union1d(self.ids, other.ids), self.n_voxels)

    def issubset(self, other):
        return bool(np.all(np.isin(self.ids, other.ids)))


def coverage_mask(rays, grid, t_max, prob=None, occlusion=None, kernel='parallel'):
    """Boolean mask over the grid of every voxel the rays traverse"""
    occlusion = occlusion or OcclusionMode.none()
    lower, res, dims = grid_arrays(grid)
    if occlusion.mode == 'threshold':
        if prob is None:
            raise ConfigurationError("threshold occlusion needs a probability field")
        stop_prob = np.ascontiguousarray(prob.non_empty)
    else:
        stop_prob = np.empty(0)
    origins = np.ascontiguousarray(rays.origins, dtype=np.float64)
    directions = np.ascontiguousarray(rays.directions, dtype=np.float64)
    return KERNELS[kernel](origins, directions, float(t_max), lower, res, dims,
                           stop_prob, float(occlusion.tau), chunk_count(len(directions)))


def coverage(placement, grid, prob, occlusion=None, kernel='parallel'):
    """Voxels covered by all rays of all LiDARs of `placement`"""
    if prob is not None and prob.grid != grid:
        raise ConfigurationError("probability field was built on a different grid")
    occlusion = occlusion or OcclusionMode.from_config()
    mask = coverage_mask(placement_rays(placement), grid, placement.spec.range_max,
                         prob, occlusion, kernel)
    result = CoverageSet.from_mask(mask)
    logger.debug("%s: %d voxels covered (%s)", placement.name, result.n_covered, occlusion)
    return result
