import logging
from dataclasses import asdict, dataclass

import numpy as np

from ..errors import InsufficientDataError
from ..utils.rng import keyed_rng

logger = logging.getLogger(__name__)

EMPIRICAL = 'empirical lower-bound estimate'
ANALYTIC = 'analytic'
_PAIR_BLOCK = 64


@dataclass(frozen=True)
class Certificate:
    """Optimality bounds for a delta-grid optimum.

    bound_thm1 = c_m + k_g * delta bounds |G(global) - G(grid optimum)|;
    bound_cor1 = k_g * sum(widths) + k_g * delta relaxes it to the search box.
    An empirical k_g is only a lower estimate of the Lipschitz constant, so
    bounds built on it are estimates too.
    """

    c_m: float
    k_g: float
    k_g_source: str
    delta: float
    bound_thm1: float
    bound_cor1: float
    n_samples: int
    best_g: float

    def to_dict(self):
        return {k: (float(v) if isinstance(v, (float, np.floating)) else v)
                for k, v in asdict(self).items()}


def max_pairwise_slope(points, values):
    """max |G_i - G_j| / ||u_i - u_j|| over distinct pairs, in row blocks"""
    best = 0.0
    for start in range(0, len(points), _PAIR_BLOCK):
        block = points[start:start + _PAIR_BLOCK]
        dist = np.linalg.norm(block[:, None, :] - points[None, :, :], axis=-1)
        diff = np.abs(values[start:start + _PAIR_BLOCK, None] - values[None, :])
        valid = dist > 0
        if np.any(valid):
            best = max(best, float(np.max(diff[valid] / dist[valid])))
    return best


def certify(evals, space, best_g=None, lipschitz=None, max_samples=None, seed=0):
    """Build a Certificate from (u, G(u)) evaluations; u are full placement vectors"""
    points = np.array([space.reduce(u) for u, _ in evals], dtype=np.float64)
    values = np.array([g for _, g in evals], dtype=np.float64)
    finite = np.isfinite(values)
    points, values = points[finite], values[finite]
    if len(points):
        points, first = np.unique(points, axis=0, return_index=True)
        values = values[first]
    if len(points) < 2:
        raise InsufficientDataError("a certificate needs at least two distinct evaluated points")

    # C_M always spans every evaluation; only the pairwise slope is subsampled
    c_m = float(values.max() - values.min())
    if max_samples and len(points) > max_samples:
        extremes = np.unique([int(np.argmin(values)), int(np.argmax(values))])
        if max_samples < len(extremes):
            raise InsufficientDataError(f"max_samples must be at least {len(extremes)}")
        others = np.setdiff1d(np.arange(len(points)), extremes)
        drawn = keyed_rng(seed, 0).choice(others, size=max_samples - len(extremes), replace=False)
        keep = np.sort(np.concatenate([extremes, drawn]))
        points, values = points[keep], values[keep]

    if lipschitz is not None:
        k_g, source = float(lipschitz), ANALYTIC
    else:
        k_g, source = max_pairwise_slope(points, values), EMPIRICAL
    delta = space.delta
    cert = Certificate(c_m=c_m, k_g=k_g, k_g_source=source, delta=delta,
                       bound_thm1=c_m + k_g * delta,
                       bound_cor1=k_g * float(np.sum(space.widths)) + k_g * delta,
                       n_samples=len(points),
                       best_g=float(values.min() if best_g is None else best_g))
    logger.info("Certificate: C_M=%.4g k_G=%.4g (%s) bound=%.4g", c_m, k_g, source, cert.bound_thm1)
    return cert
