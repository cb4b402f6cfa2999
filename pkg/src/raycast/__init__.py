from .sensor import (
    LidarSpec,
    LidarExtrinsic,
    Placement,
    BASELINE_NAMES,
    load_placement,
    save_placement,
    load_placement_group,
    load_baselines
)
from .rays import RayBundle, gen_rays, placement_rays, roll_rotation
from .traversal import traverse
from .coverage import OcclusionMode, CoverageSet, coverage, coverage_mask

__all__ = [
    'LidarSpec',
    'LidarExtrinsic',
    'Placement',
    'BASELINE_NAMES',
    'load_placement',
    'save_placement',
    'load_placement_group',
    'load_baselines',
    'RayBundle',
    'gen_rays',
    'placement_rays',
    'roll_rotation',
    'traverse',
    'OcclusionMode',
    'CoverageSet',
    'coverage',
    'coverage_mask'
]
