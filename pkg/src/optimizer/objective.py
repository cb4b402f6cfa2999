import logging

import numpy as np

from ..errors import UndefinedMetricError
from ..metric.scores import detection_relabel, msog
from ..raycast.coverage import OcclusionMode, coverage
from ..raycast.sensor import LidarSpec, Placement
from ..utils.rng import keyed_rng
from .space import penalty

logger = logging.getLogger(__name__)

PROBE_COUNT = 16
LAMBDA_SCALE = 10.0
# stream key for lambda probes, away from the (iteration, candidate) keys
_PROBE_STREAM = 2 ** 31


class PlacementObjective:
    """G(u) = -M_SOG(coverage(u)) + lambda * P(u); lower is better.

    An empty coverage set scores +inf. Evaluation is pure, so several
    candidates can be scored from a thread pool with kernel='serial'.
    """

    def __init__(self, prob, space, constraints, spec=None, occlusion=None,
                 mode='segmentation', target=None, kernel='parallel'):
        if mode == 'detection':
            prob = detection_relabel(prob, target)
        self.prob = prob
        self.grid = prob.grid
        self.space = space
        self.constraints = constraints
        self.spec = spec or LidarSpec.from_config()
        self.occlusion = occlusion or OcclusionMode.from_config()
        self.mode = mode
        self.kernel = kernel

    @property
    def lam(self):
        return self.constraints.lam or 0.0

    def placement(self, u, name='candidate'):
        return Placement.from_vector(u, self.spec, name)

    def metric(self, u):
        """M_SOG of placement vector u, or None when it covers nothing"""
        cov = coverage(self.placement(u), self.grid, self.prob, self.occlusion, self.kernel)
        try:
            return msog(self.prob, cov).value
        except UndefinedMetricError:
            return None

    def evaluate(self, u):
        """(G, M_SOG, penalty) for a full placement vector"""
        u = np.asarray(u, dtype=np.float64)
        pen = penalty(u, self.constraints, self.space)
        value = self.metric(u)
        if value is None:
            return float('inf'), float('nan'), pen
        return -value + self.lam * pen, value, pen

    def __call__(self, u):
        return self.evaluate(u)[0]

    def penalty(self, u):
        return penalty(u, self.constraints, self.space)

    def estimate_lambda(self, seed=0, n_probe=PROBE_COUNT):
        """10 x mean |M_SOG| over random grid placements; 1.0 when that is zero"""
        rng = keyed_rng(seed, _PROBE_STREAM)
        values = []
        for _ in range(n_probe):
            x = self.space.snap(rng.uniform(self.space.lower, self.space.upper))
            value = self.metric(self.space.expand(x))
            if value is not None:
                values.append(abs(value))
        scale = float(np.mean(values)) if values else 0.0
        lam = LAMBDA_SCALE * scale if scale > 0 else 1.0
        logger.info("Estimated lambda = %.6g from %d probes", lam, len(values))
        return lam
