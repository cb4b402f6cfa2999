import numpy as np

from ..errors import UndefinedCorrelationError


def pearson(xs, ys):
    """Sample Pearson correlation, clamped into [-1, 1]"""
    x = np.asarray(xs, dtype=np.float64).ravel()
    y = np.asarray(ys, dtype=np.float64).ravel()
    if len(x) != len(y):
        raise UndefinedCorrelationError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < 2:
        raise UndefinedCorrelationError("need at least two points")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise UndefinedCorrelationError("non-finite input")
    dx = x - x.mean()
    dy = y - y.mean()
    nx = np.linalg.norm(dx)
    ny = np.linalg.norm(dy)
    if nx == 0.0 or ny == 0.0:
        raise UndefinedCorrelationError("zero variance")
    ux = dx / nx
    uy = dy / ny
    # r = 1 - |ux - uy|^2 / 2 = |ux + uy|^2 / 2 - 1; the squared gap vanishes
    # below rounding for exactly linear data, giving +-1 exactly
    if float(ux @ uy) >= 0.0:
        gap = ux - uy
        r = 1.0 - float(gap @ gap) / 2.0
    else:
        gap = ux + uy
        r = float(gap @ gap) / 2.0 - 1.0
    return float(np.clip(r, -1.0, 1.0))
