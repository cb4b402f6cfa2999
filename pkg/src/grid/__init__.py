from .roi import RoiGrid
from .classes import ClassTable
from .psog import (
    UNOBSERVED,
    SogFrame,
    PSog,
    ProbField,
    accumulate_frame,
    finalize,
    entropy_rows,
    voxel_entropy
)
from .psog_file import save_psog, load_psog

__all__ = [
    'RoiGrid',
    'ClassTable',
    'UNOBSERVED',
    'SogFrame',
    'PSog',
    'ProbField',
    'accumulate_frame',
    'finalize',
    'entropy_rows',
    'voxel_entropy',
    'save_psog',
    'load_psog'
]
