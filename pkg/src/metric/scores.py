import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import ConfigurationError, UndefinedMetricError, ValidationError
from ..grid.psog import ProbField, entropy_rows

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MetricScore:
    """One metric value over a coverage set.

    mode is 'segmentation', 'detection' (with `target`) or 'smig'. For the
    entropy metrics `entropy_sum` is the summed entropy over covered voxels
    and `h_total` the summed entropy over the whole ROI.
    """

    value: float
    n_covered: int
    mode: str
    target: Optional[str] = None
    entropy_sum: float = 0.0
    h_total: float = 0.0

    @property
    def delta_h(self):
        return self.h_total - self.entropy_sum

    @property
    def per_voxel(self):
        return self.value / self.n_covered


def _covered_ids(prob, cov):
    if cov.n_covered == 0:
        raise UndefinedMetricError("metric is undefined over an empty coverage set")
    if cov.n_voxels != prob.grid.n_voxels:
        raise ConfigurationError("coverage set and probability field use different grids")
    return cov.ids


def _mode_of(prob):
    if prob.detection_target is not None:
        return 'detection', prob.detection_target
    return 'segmentation', None


def msog(prob, cov):
    """Minus the mean voxel entropy over the covered voxels (nats), in [-ln M, 0]"""
    ids = _covered_ids(prob, cov)
    h = prob.entropy[ids]
    entropy_sum = float(h.sum())
    value = -entropy_sum / len(ids)
    value = min(0.0, max(-np.log(prob.classes.n_classes), value))
    mode, target = _mode_of(prob)
    return MetricScore(value, len(ids), mode, target, entropy_sum, float(prob.entropy.sum()))


def binary_entropy(p):
    p = np.asarray(p, dtype=np.float64)
    with np.errstate(divide='ignore', invalid='ignore'):
        h = -np.where(p > 0, p * np.log(p), 0.0) - np.where(p < 1, (1 - p) * np.log1p(-p), 0.0)
    return np.clip(h, 0.0, np.log(2.0))


def smig(prob, cov):
    """Minus the summed Bernoulli occupancy entropy over covered voxels, unnormalized"""
    ids = _covered_ids(prob, cov)
    h = binary_entropy(prob.non_empty)
    entropy_sum = float(h[ids].sum())
    return MetricScore(-entropy_sum, len(ids), 'smig', None, entropy_sum, float(h.sum()))


def detection_relabel(prob, target):
    """Collapse the field to {target, other, empty}; empty keeps its own class"""
    classes = prob.classes
    if isinstance(target, (int, np.integer)):
        if not 0 <= target < classes.n_classes:
            raise ValidationError(f"target class {target} outside 0..{classes.n_classes - 1}")
        target_id = int(target)
    else:
        target_id = classes.index(target)
    if target_id == classes.empty_class_id:
        raise ValidationError("the detection target cannot be the empty class")
    empty_id = classes.empty_class_id

    others = np.ones(classes.n_classes, dtype=bool)
    others[[target_id, empty_id]] = False
    p = prob.probs
    merged = np.column_stack([p[:, target_id], p[:, others].sum(axis=1), p[:, empty_id]])
    return ProbField(prob.grid, classes.detection(target_id), merged, prob.observed,
                     detection_target=classes.names[target_id])
