import logging
from functools import cached_property

import numpy as np

from ..errors import (ConfigurationError, EmptyAccumulatorError,
                      GridMismatchError, ValidationError)

logger = logging.getLogger(__name__)

UNOBSERVED = -1

# Class tables up to this size keep a dense (N, M) count array
DENSE_CLASS_LIMIT = 32

_NORMALIZATION_TOL = 1e-9


class SogFrame:
    """Per-voxel class labels of one time frame; UNOBSERVED where no point fell"""

    def __init__(self, grid, labels):
        labels = np.asarray(labels, dtype=np.int32)
        if labels.shape != (grid.n_voxels,):
            raise ConfigurationError(
                f"frame has {labels.shape} labels, grid has {grid.n_voxels} voxels")
        if np.any(labels < UNOBSERVED):
            raise ConfigurationError("frame labels must be class ids or the unobserved sentinel")
        self.grid = grid
        self.labels = labels

    @property
    def observed(self):
        return self.labels != UNOBSERVED

    @property
    def n_observed(self):
        return int(np.count_nonzero(self.observed))


class DenseCounts:
    """(N, M) uint32 count array"""

    def __init__(self, n_voxels, n_classes, counts=None):
        if counts is None:
            counts = np.zeros((n_voxels, n_classes), dtype=np.uint32)
        self.counts = counts

    def add(self, voxel_ids, class_ids):
        # each voxel appears at most once per frame, so plain fancy-index increments are exact
        self.counts[voxel_ids, class_ids] += 1

    def to_dense(self):
        return self.counts


class SparseCounts:
    """COO counts keyed by voxel * M + class, for wide class tables"""

    def __init__(self, n_voxels, n_classes):
        self.n_voxels = n_voxels
        self.n_classes = n_classes
        self.keys = np.empty(0, dtype=np.int64)
        self.values = np.empty(0, dtype=np.uint32)

    def add(self, voxel_ids, class_ids):
        new_keys = voxel_ids.astype(np.int64) * self.n_classes + class_ids
        keys = np.concatenate([self.keys, new_keys])
        values = np.concatenate([self.values, np.ones(len(new_keys), dtype=np.uint32)])
        self.keys, inverse = np.unique(keys, return_inverse=True)
        self.values = np.bincount(inverse, weights=values,
                                  minlength=len(self.keys)).astype(np.uint32)

    def to_dense(self):
        dense = np.zeros((self.n_voxels, self.n_classes), dtype=np.uint32)
        dense.reshape(-1)[self.keys] = self.values
        return dense


class PSog:
    """Per-voxel class observation counts over T frames"""

    def __init__(self, grid, classes, counts=None, frames_seen=0):
        self.grid = grid
        self.classes = classes
        self.frames_seen = int(frames_seen)
        n, m = grid.n_voxels, classes.n_classes
        if counts is not None:
            counts = np.ascontiguousarray(counts, dtype=np.uint32)
            if counts.shape != (n, m):
                raise GridMismatchError(f"counts shape {counts.shape} does not match ({n}, {m})")
            if np.any(counts.sum(axis=1, dtype=np.uint64) > self.frames_seen):
                raise ValidationError("a voxel has more observations than frames")
            self._store = DenseCounts(n, m, counts)
        elif m <= DENSE_CLASS_LIMIT:
            self._store = DenseCounts(n, m)
        else:
            self._store = SparseCounts(n, m)

    @property
    def counts(self):
        return self._store.to_dense()

    @property
    def is_sparse(self):
        return isinstance(self._store, SparseCounts)

    def accumulate(self, frame):
        if frame.grid != self.grid:
            raise ConfigurationError("frame grid does not match the P-SOG grid")
        observed = np.flatnonzero(frame.observed)
        labels = frame.labels[observed]
        if len(labels) and labels.max() >= self.classes.n_classes:
            raise ConfigurationError(
                f"frame label {labels.max()} outside the {self.classes.n_classes}-class table")
        self._store.add(observed, labels)
        self.frames_seen += 1
        return self


def accumulate_frame(psog, frame):
    """Add one SOG frame to the counts; mutates and returns psog"""
    return psog.accumulate(frame)


class ProbField:
    """Finalized per-voxel class probabilities; read-only.

    `detection_target` names the target class when the field is the
    {target, other, empty} relabeling of a semantic field.
    """

    def __init__(self, grid, classes, probs, observed=None, detection_target=None):
        probs = np.array(probs, dtype=np.float64)
        if probs.shape != (grid.n_voxels, classes.n_classes):
            raise GridMismatchError(
                f"probability shape {probs.shape} does not match "
                f"({grid.n_voxels}, {classes.n_classes})")
        if observed is None:
            observed = np.ones(grid.n_voxels, dtype=bool)
        observed = np.array(observed, dtype=bool)
        probs.setflags(write=False)
        observed.setflags(write=False)
        self.grid = grid
        self.classes = classes
        self.probs = probs
        self.observed = observed
        self.detection_target = detection_target

    @cached_property
    def entropy(self):
        """Per-voxel entropy in nats"""
        h = entropy_rows(self.probs)
        h.setflags(write=False)
        return h

    @cached_property
    def non_empty(self):
        """Per-voxel P(occupied) = 1 - p(empty)"""
        p = 1.0 - self.probs[:, self.classes.empty_class_id]
        p.setflags(write=False)
        return p

    @property
    def n_unobserved(self):
        return int(self.grid.n_voxels - np.count_nonzero(self.observed))


def finalize(psog):
    """Turn counts into probabilities.

    p(c) = counts[c] / T for every non-empty class. The mass T - sum(counts) of
    frames in which the voxel held no point is credited to the empty class, so
    voxels never observed become one-hot empty.
    """
    if psog.frames_seen < 1:
        raise EmptyAccumulatorError("cannot finalize a P-SOG with no frames")
    t = float(psog.frames_seen)
    counts = psog.counts.astype(np.float64)
    totals = counts.sum(axis=1)
    probs = counts / t
    probs[:, psog.classes.empty_class_id] += (t - totals) / t
    observed = totals > 0
    field = ProbField(psog.grid, psog.classes, probs, observed)
    if field.n_unobserved:
        logger.info("%d of %d voxels were never observed and count as empty",
                    field.n_unobserved, psog.grid.n_voxels)
    return field


def entropy_rows(probs):
    """-sum p ln p per row, zero terms dropped, clamped into [0, ln M]"""
    probs = np.asarray(probs, dtype=np.float64)
    with np.errstate(divide='ignore', invalid='ignore'):
        terms = np.where(probs > 0, probs * np.log(probs), 0.0)
    h = -terms.sum(axis=-1)
    return np.clip(h, 0.0, np.log(probs.shape[-1]))


def voxel_entropy(p):
    """Entropy of one probability vector in nats"""
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or len(p) < 1:
        raise ValidationError("expected a one-dimensional probability vector")
    if np.any(~np.isfinite(p)) or np.any(p < 0):
        raise ValidationError(f"probabilities must be finite and nonnegative: {p}")
    if abs(p.sum() - 1.0) > _NORMALIZATION_TOL:
        raise ValidationError(f"probabilities sum to {p.sum()}, not 1")
    return float(entropy_rows(p[None, :])[0])
