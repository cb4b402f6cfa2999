from .io_utils import (
    atomic_write,
    write_yaml,
    manifest_path_for,
    RunManifest
)
from .rng import keyed_rng
from .thread_utils import resolve_thread_count, apply_thread_count

__all__ = [
    'atomic_write',
    'write_yaml',
    'manifest_path_for',
    'RunManifest',
    'keyed_rng',
    'resolve_thread_count',
    'apply_thread_count'
]
