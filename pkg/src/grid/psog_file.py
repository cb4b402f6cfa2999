"""Binary P-SOG file: little-endian header, N*M u32 counts, then class names.

Header: magic "PSOG", version u32, n_l/n_w/n_h u32, res 3 x f64, origin 3 x f64,
M u16, empty class u16, T u64. Counts are voxel-major (i_l fastest) and
class-minor. The names block is a u32 byte length followed by the names
joined with newlines in UTF-8.
"""
import logging
import struct
from pathlib import Path

import numpy as np

from ..errors import FormatError, GridMismatchError
from ..utils.io_utils import atomic_write
from .classes import ClassTable
from .psog import PSog
from .roi import RoiGrid

logger = logging.getLogger(__name__)

MAGIC = b'PSOG'
VERSION = 1
_HEADER = struct.Struct('<4sI3I3d3dHHQ')
_LENGTH = struct.Struct('<I')


def save_psog(psog, path):
    grid, classes = psog.grid, psog.classes
    header = _HEADER.pack(MAGIC, VERSION, grid.n_l, grid.n_w, grid.n_h,
                          grid.res_l, grid.res_w, grid.res_h, *grid.origin,
                          classes.n_classes, classes.empty_class_id, psog.frames_seen)
    counts = np.ascontiguousarray(psog.counts, dtype='<u4')
    names = '\n'.join(classes.names).encode('utf-8')

    def _write(f):
        f.write(header)
        f.write(counts.tobytes(order='C'))
        f.write(_LENGTH.pack(len(names)))
        f.write(names)

    atomic_write(path, _write, mode='wb')
    logger.info("Saved P-SOG (%d voxels, %d classes, T=%d) to %s",
                grid.n_voxels, classes.n_classes, psog.frames_seen, path)
    return Path(path)


def load_psog(path, expected_grid=None, expected_classes=None):
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise FormatError(f"cannot read P-SOG file {path}: {e}") from e
    if len(data) < _HEADER.size:
        raise FormatError(f"{path}: file too short for a P-SOG header")
    (magic, version, n_l, n_w, n_h, r_l, r_w, r_h, o_x, o_y, o_z,
     n_classes, empty_id, frames_seen) = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")

    n_voxels = n_l * n_w * n_h
    offset = _HEADER.size
    count_bytes = n_voxels * n_classes * 4
    if len(data) < offset + count_bytes + _LENGTH.size:
        raise FormatError(f"{path}: truncated count block")
    counts = np.frombuffer(data, dtype='<u4', count=n_voxels * n_classes, offset=offset)
    counts = counts.reshape(n_voxels, n_classes).astype(np.uint32)
    offset += count_bytes
    (name_len,) = _LENGTH.unpack_from(data, offset)
    offset += _LENGTH.size
    if len(data) != offset + name_len:
        raise FormatError(f"{path}: class name block length mismatch")
    try:
        names = data[offset:].decode('utf-8').split('\n')
    except UnicodeDecodeError as e:
        raise FormatError(f"{path}: class names are not UTF-8") from e
    if len(names) != n_classes:
        raise FormatError(f"{path}: header says {n_classes} classes, found {len(names)} names")

    grid = RoiGrid(n_l * r_l, n_w * r_w, n_h * r_h, r_l, r_w, r_h,
                   n_l, n_w, n_h, (o_x, o_y, o_z))
    classes = ClassTable(tuple(names), empty_id)
    if expected_grid is not None and expected_grid != grid:
        raise GridMismatchError(f"{path}: P-SOG grid differs from the configured grid")
    if expected_classes is not None and expected_classes != classes:
        raise GridMismatchError(f"{path}: P-SOG class table differs from the configured one")
    return PSog(grid, classes, counts, frames_seen)
