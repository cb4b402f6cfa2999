"""Text formats for clouds, poses and scene manifests.

Cloud frame: one "x y z class_id" point per line, "#" comments allowed; a
leading "# frame_id <n>" comment records the frame id. Pose file: one
"frame_id tx ty tz yaw" line per frame.
"""
import logging
import re
from pathlib import Path

import numpy as np
import pandas as pd
import yaml

from ..errors import IngestError, ParseError
from ..grid.classes import ClassTable
from ..utils.io_utils import atomic_write, write_yaml
from .cloud import EgoPose, LabeledCloud

logger = logging.getLogger(__name__)

_FRAME_ID_RE = re.compile(r'^#\s*frame_id\s*[:=]?\s*(\d+)\s*$')
SCENE_MANIFEST = 'scene.yaml'
POSES_FILE = 'poses.txt'


def frame_file_name(frame_id):
    return f"frame_{frame_id:06d}.txt"


def _parse_point_line(fields, path, line_no):
    if len(fields) != 4:
        raise ParseError(path, line_no, f"expected 'x y z class_id', got {len(fields)} fields")
    try:
        xyz = [float(v) for v in fields[:3]]
    except ValueError:
        raise ParseError(path, line_no, "coordinates must be numbers") from None
    if not np.all(np.isfinite(xyz)):
        raise ParseError(path, line_no, "coordinates must be finite")
    try:
        class_id = int(fields[3])
    except ValueError:
        raise ParseError(path, line_no, f"class id {fields[3]!r} is not an integer") from None
    if not 0 <= class_id <= np.iinfo(np.uint16).max:
        raise ParseError(path, line_no, f"class id {class_id} does not fit in u16")


def _locate_bad_line(path):
    """Scan a frame file line by line and raise ParseError at the first bad line"""
    with open(path, 'r') as f:
        for line_no, line in enumerate(f, start=1):
            content = line.split('#', 1)[0].strip()
            if content:
                _parse_point_line(content.split(), path, line_no)
    raise ParseError(path, 0, "unparseable frame file")


def _read_frame_id(path):
    with open(path, 'r') as f:
        for line in f:
            stripped = line.strip()
            if not stripped:
                continue
            match = _FRAME_ID_RE.match(stripped)
            return int(match.group(1)) if match else None
    return None


def load_cloud(path, frame_id=None):
    """Read a point-cloud frame; frame_id overrides the id stored in the file"""
    path = Path(path)
    if not path.exists():
        raise IngestError(f"frame file not found: {path}")
    if frame_id is None:
        frame_id = _read_frame_id(path) or 0
    try:
        table = pd.read_csv(path, sep=r'\s+', comment='#', header=None,
                            dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        return LabeledCloud(np.empty((0, 3)), np.empty(0, dtype=np.uint16), frame_id)
    except pd.errors.ParserError:
        _locate_bad_line(path)

    if table.shape[1] != 4 or table.isna().any(axis=None) or (table == '').any(axis=None):
        _locate_bad_line(path)
    try:
        points = table.iloc[:, :3].to_numpy().astype(np.float64)
        labels = table.iloc[:, 3].to_numpy().astype(np.int64)
    except ValueError:
        _locate_bad_line(path)
    if not np.all(np.isfinite(points)) or (len(labels) and (
            labels.min() < 0 or labels.max() > np.iinfo(np.uint16).max)):
        _locate_bad_line(path)
    return LabeledCloud(points, labels, frame_id)


def save_cloud(cloud, path):
    """Write a frame with repr-precision floats so loading gives the same cloud back"""
    table = pd.DataFrame({
        'x': cloud.points[:, 0],
        'y': cloud.points[:, 1],
        'z': cloud.points[:, 2],
        'class_id': cloud.labels.astype(np.int64),
    })

    def _write(f):
        f.write(f"# frame_id {cloud.frame_id}\n")
        if len(table):
            table.to_csv(f, sep=' ', header=False, index=False, lineterminator='\n')

    return atomic_write(path, _write)


def load_poses(path):
    path = Path(path)
    if not path.exists():
        raise IngestError(f"pose file not found: {path}")
    poses = []
    with open(path, 'r') as f:
        for line_no, line in enumerate(f, start=1):
            content = line.split('#', 1)[0].strip()
            if not content:
                continue
            fields = content.split()
            if len(fields) != 5:
                raise ParseError(path, line_no,
                                 f"expected 'frame_id tx ty tz yaw', got {len(fields)} fields")
            try:
                frame_id = int(fields[0])
                tx, ty, tz, yaw = (float(v) for v in fields[1:])
            except ValueError:
                raise ParseError(path, line_no, "non-numeric pose field") from None
            if not np.all(np.isfinite([tx, ty, tz, yaw])):
                raise ParseError(path, line_no, "pose values must be finite")
            poses.append(EgoPose(frame_id, (tx, ty, tz), yaw))
    return poses


def save_poses(poses, path):
    def _write(f):
        f.write("# frame_id tx ty tz yaw\n")
        for pose in poses:
            tx, ty, tz = pose.translation
            f.write(f"{pose.frame_id} {tx!r} {ty!r} {tz!r} {pose.yaw!r}\n")

    return atomic_write(path, _write)


class SceneDirectory:
    """A scene on disk: frame files, a pose file and scene.yaml"""

    def __init__(self, root):
        self.root = Path(root)
        manifest_path = self.root / SCENE_MANIFEST
        if not manifest_path.exists():
            raise IngestError(f"no {SCENE_MANIFEST} in {self.root}")
        try:
            with open(manifest_path, 'r') as f:
                self.manifest = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise IngestError(f"malformed scene manifest {manifest_path}: {e}") from e
        for key in ('frames', 'poses', 'classes'):
            if key not in self.manifest:
                raise IngestError(f"scene manifest {manifest_path} lacks '{key}'")
        self.classes = ClassTable.from_dict(self.manifest['classes'])
        self.frame_files = [self.root / name for name in self.manifest['frames']]
        self.poses = load_poses(self.root / self.manifest['poses'])

    @property
    def n_frames(self):
        return len(self.frame_files)

    @property
    def params(self):
        return self.manifest.get('params', {})

    @property
    def corruption(self):
        return self.manifest.get('corruption')

    def frame_ids(self):
        return [pose.frame_id for pose in self.poses]

    def load_frame(self, index):
        return load_cloud(self.frame_files[index])

    @classmethod
    def write(cls, root, clouds, poses, classes, params=None, corruption=None):
        root = Path(root)
        root.mkdir(parents=True, exist_ok=True)
        names = []
        for cloud in clouds:
            name = frame_file_name(cloud.frame_id)
            save_cloud(cloud, root / name)
            names.append(name)
        save_poses(poses, root / POSES_FILE)
        manifest = {
            'frames': names,
            'poses': POSES_FILE,
            'classes': classes.to_dict(),
            'params': params or {},
        }
        if corruption is not None:
            manifest['corruption'] = corruption
        write_yaml(root / SCENE_MANIFEST, manifest)
        logger.info("Wrote %d frames to %s", len(names), root)
        return cls(root)
