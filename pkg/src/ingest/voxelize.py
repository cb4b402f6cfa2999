import numpy as np

from ..errors import ConfigurationError
from ..grid.psog import UNOBSERVED, SogFrame


def voxelize_vote(cloud, grid, classes):
    """Label each voxel by the majority class of its points.

    Ties go to the lowest class id; voxels with no points stay UNOBSERVED.
    """
    labels = np.full(grid.n_voxels, UNOBSERVED, dtype=np.int32)
    if len(cloud) == 0:
        return SogFrame(grid, labels)
    n_classes = classes.n_classes
    if int(cloud.labels.max()) >= n_classes:
        raise ConfigurationError(
            f"cloud label {int(cloud.labels.max())} outside the {n_classes}-class table")

    ids = grid.voxel_ids(cloud.points)
    inside = ids >= 0
    keys = ids[inside] * n_classes + cloud.labels[inside].astype(np.int64)
    if len(keys) == 0:
        return SogFrame(grid, labels)

    keys, votes = np.unique(keys, return_counts=True)
    voxels, class_ids = np.divmod(keys, n_classes)
    # per voxel: most votes first, then lowest class id
    order = np.lexsort((class_ids, -votes, voxels))
    voxels, class_ids = voxels[order], class_ids[order]
    _, first = np.unique(voxels, return_index=True)
    labels[voxels[first]] = class_ids[first]
    return SogFrame(grid, labels)
