import logging
from collections import deque

from ..config import Config
from ..corrupt.transforms import apply as apply_corruption
from ..errors import ConfigurationError, GridMismatchError
from ..grid.psog import PSog
from ..grid.roi import RoiGrid
from .cloud import aggregate_frames
from .voxelize import voxelize_vote

logger = logging.getLogger(__name__)


class PsogBuilder:
    """Raw frames -> (corrupt) -> sliding-window aggregate -> vote -> accumulate.

    Frame t contributes the dense cloud of frames max(0, t - window + 1)..t,
    expressed in frame t's ego coordinates.
    """

    def __init__(self, grid=None, window=None, corruption=None):
        self.config = Config()
        self.grid = grid or RoiGrid.from_config(self.config)
        self.window = int(window if window is not None else self.config.ingest.get('window', 1))
        if self.window < 1:
            raise ConfigurationError("aggregation window must be at least 1")
        self.corruption = corruption

    def build(self, clouds, poses, classes):
        """Build from in-memory clouds (ordered by time) and their poses"""
        return self._build((c for c in clouds), poses, classes, len(clouds))

    def build_from_dir(self, scene):
        """Build from a SceneDirectory, reading one frame at a time"""
        frames = (scene.load_frame(i) for i in range(scene.n_frames))
        return self._build(frames, scene.poses, scene.classes, scene.n_frames)

    def _build(self, frames, poses, classes, n_frames):
        psog = PSog(self.grid, classes)
        recent = deque(maxlen=self.window)
        for cloud in frames:
            if len(cloud) and int(cloud.labels.max()) >= classes.n_classes:
                raise GridMismatchError(
                    f"frame {cloud.frame_id} uses class {int(cloud.labels.max())}, "
                    f"table has {classes.n_classes}")
            if self.corruption is not None:
                cloud = apply_corruption(cloud, self.corruption, classes)
            recent.append(cloud)
            dense = aggregate_frames(list(recent), poses, cloud.frame_id)
            psog.accumulate(voxelize_vote(dense, self.grid, classes))
            logger.debug("Frame %d: %d dense points", cloud.frame_id, len(dense))
        logger.info("Built P-SOG from %d frames (window %d%s)", n_frames, self.window,
                    f", {self.corruption.kind}" if self.corruption else "")
        return psog
