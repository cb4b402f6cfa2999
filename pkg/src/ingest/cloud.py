import logging
from dataclasses import dataclass, field

import numpy as np

from ..errors import IngestError, ValidationError

logger = logging.getLogger(__name__)


class LabeledCloud:
    """Points (P, 3) in the ego frame of `frame_id` with a u16 class id each"""

    def __init__(self, points, labels, frame_id=0):
        points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        labels = np.asarray(labels)
        if labels.shape != (len(points),):
            raise ValidationError(f"{len(points)} points but {labels.shape} labels")
        if len(labels) and (labels.min() < 0 or labels.max() > np.iinfo(np.uint16).max):
            raise ValidationError("class ids must fit in u16")
        self.points = points
        self.labels = labels.astype(np.uint16)
        self.frame_id = int(frame_id)

    def __len__(self):
        return len(self.points)

    def __eq__(self, other):
        if not isinstance(other, LabeledCloud):
            return NotImplemented
        return (self.frame_id == other.frame_id
                and np.array_equal(self.points, other.points)
                and np.array_equal(self.labels, other.labels))

    def __repr__(self):
        return f"LabeledCloud(frame_id={self.frame_id}, points={len(self)})"

    def subset(self, mask):
        return LabeledCloud(self.points[mask], self.labels[mask], self.frame_id)

    def with_points(self, points, labels=None):
        return LabeledCloud(points, self.labels if labels is None else labels, self.frame_id)


def yaw_rotation(yaw):
    c, s = np.cos(yaw), np.sin(yaw)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


@dataclass(frozen=True)
class EgoPose:
    """Planar ego pose in the world frame"""

    frame_id: int
    translation: tuple = field(default=(0.0, 0.0, 0.0))
    yaw: float = 0.0

    def __post_init__(self):
        translation = tuple(float(v) for v in self.translation)
        if len(translation) != 3 or not np.all(np.isfinite(translation)) or not np.isfinite(self.yaw):
            raise ValidationError(f"pose {self.frame_id} has non-finite values")
        object.__setattr__(self, 'translation', translation)
        object.__setattr__(self, 'frame_id', int(self.frame_id))
        object.__setattr__(self, 'yaw', float(self.yaw))

    def rotation(self):
        return yaw_rotation(self.yaw)

    def to_world(self, points):
        return np.asarray(points, dtype=np.float64) @ self.rotation().T + np.array(self.translation)

    def from_world(self, points):
        return (np.asarray(points, dtype=np.float64) - np.array(self.translation)) @ self.rotation()


def aggregate_frames(clouds, poses, anchor):
    """Merge clouds into the ego frame of `anchor`.

    Each cloud goes to the world frame with its own pose, then into the
    anchor frame with the inverse anchor pose.
    """
    by_frame = {pose.frame_id: pose for pose in poses}
    if anchor not in by_frame:
        raise IngestError(f"no pose for anchor frame {anchor}")
    anchor_pose = by_frame[anchor]

    merged_points, merged_labels = [], []
    for cloud in clouds:
        pose = by_frame.get(cloud.frame_id)
        if pose is None:
            raise IngestError(f"no pose for frame {cloud.frame_id}")
        if pose == anchor_pose:
            merged_points.append(cloud.points)
        else:
            merged_points.append(anchor_pose.from_world(pose.to_world(cloud.points)))
        merged_labels.append(cloud.labels)

    if not merged_points:
        return LabeledCloud(np.empty((0, 3)), np.empty(0, dtype=np.uint16), anchor)
    return LabeledCloud(np.concatenate(merged_points), np.concatenate(merged_labels), anchor)
