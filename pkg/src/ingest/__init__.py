from .cloud import LabeledCloud, EgoPose, aggregate_frames
from .voxelize import voxelize_vote
from .formats import load_cloud, save_cloud, load_poses, save_poses, SceneDirectory
from .scene import SceneParams, SceneGenerator, Scene, ObjectRecord, gen_scene
from .pipeline import PsogBuilder

__all__ = [
    'LabeledCloud',
    'EgoPose',
    'aggregate_frames',
    'voxelize_vote',
    'load_cloud',
    'save_cloud',
    'load_poses',
    'save_poses',
    'SceneDirectory',
    'SceneParams',
    'SceneGenerator',
    'Scene',
    'ObjectRecord',
    'gen_scene',
    'PsogBuilder'
]
