"""Amanatides-Woo voxel traversal kernels.

The segment [o, o + t_max * d] is clipped to the ROI box with a slab test,
then stepped voxel by voxel along the axis whose next boundary is nearest.
Voxels are half-open, so a segment that only touches a face, or ends exactly
on one, does not enter the voxel behind it.
"""
import numpy as np
from numba import njit, prange

# rays per chunk; chunking depends on the ray count only, so the merged
# coverage mask is the same whatever the thread count
RAYS_PER_CHUNK = 1024
MAX_CHUNKS = 16


@njit(nogil=True)
def _slab(o, d, lo, hi, t0, t1):
    if d == 0.0:
        return t0, t1, (lo <= o) and (o < hi)
    ta = (lo - o) / d
    tb = (hi - o) / d
    if ta > tb:
        ta, tb = tb, ta
    return max(t0, ta), min(t1, tb), True


@njit(nogil=True)
def _axis_start(o, d, t0, lo, r, n):
    s = (o + t0 * d - lo) / r
    if d < 0.0:
        i = int(np.ceil(s)) - 1
    else:
        i = int(np.floor(s))
    if i < 0:
        i = 0
    elif i > n - 1:
        i = n - 1
    if d > 0.0:
        return i, 1, (lo + (i + 1) * r - o) / d, r / d
    if d < 0.0:
        return i, -1, (lo + i * r - o) / d, -r / d
    return i, 0, np.inf, np.inf


@njit(nogil=True)
def walk(ox, oy, oz, dx, dy, dz, t_max, lower, res, dims, stop_prob, tau, out):
    """Write the voxel ids of one segment into `out` in entry order; return how many.

    With a non-empty `stop_prob`, the walk ends after the first voxel whose
    value reaches `tau` (that voxel is kept).
    """
    nl, nw, nh = dims[0], dims[1], dims[2]
    t0, t1, hit_x = _slab(ox, dx, lower[0], lower[0] + nl * res[0], 0.0, t_max)
    t0, t1, hit_y = _slab(oy, dy, lower[1], lower[1] + nw * res[1], t0, t1)
    t0, t1, hit_z = _slab(oz, dz, lower[2], lower[2] + nh * res[2], t0, t1)
    if not (hit_x and hit_y and hit_z) or t0 >= t1:
        return 0

    il, sl, tnl, tdl = _axis_start(ox, dx, t0, lower[0], res[0], nl)
    iw, sw, tnw, tdw = _axis_start(oy, dy, t0, lower[1], res[1], nw)
    ih, sh, tnh, tdh = _axis_start(oz, dz, t0, lower[2], res[2], nh)

    check = stop_prob.shape[0] > 0
    cap = out.shape[0]
    count = 0
    while count < cap:
        vid = il + nl * (iw + nw * ih)
        out[count] = vid
        count += 1
        if check and stop_prob[vid] >= tau:
            break
        if tnl < tnw:
            axis = 0 if tnl < tnh else 2
        else:
            axis = 1 if tnw < tnh else 2
        if axis == 0:
            if tnl >= t1:
                break
            il += sl
            if il < 0 or il >= nl:
                break
            tnl += tdl
        elif axis == 1:
            if tnw >= t1:
                break
            iw += sw
            if iw < 0 or iw >= nw:
                break
            tnw += tdw
        else:
            if tnh >= t1:
                break
            ih += sh
            if ih < 0 or ih >= nh:
                break
            tnh += tdh
    return count


def _coverage_impl(origins, directions, t_max, lower, res, dims, stop_prob, tau, n_chunks):
    n_rays = origins.shape[0]
    n_vox = dims[0] * dims[1] * dims[2]
    cap = dims[0] + dims[1] + dims[2] + 1
    chunk = (n_rays + n_chunks - 1) // n_chunks
    masks = np.zeros((n_chunks, n_vox), dtype=np.bool_)
    for c in prange(n_chunks):
        buf = np.empty(cap, dtype=np.int64)
        start = c * chunk
        stop = min(n_rays, start + chunk)
        for r in range(start, stop):
            k = walk(origins[r, 0], origins[r, 1], origins[r, 2],
                     directions[r, 0], directions[r, 1], directions[r, 2],
                     t_max, lower, res, dims, stop_prob, tau, buf)
            for j in range(k):
                masks[c, buf[j]] = True
    merged = np.zeros(n_vox, dtype=np.bool_)
    for v in prange(n_vox):
        for c in range(n_chunks):
            if masks[c, v]:
                merged[v] = True
                break
    return merged


# standalone calls spread rays over numba's threads; the serial build releases
# the GIL so callers can run several placements from a thread pool
coverage_mask_parallel = njit(parallel=True)(_coverage_impl)
coverage_mask_serial = njit(nogil=True)(_coverage_impl)


def chunk_count(n_rays):
    return max(1, min(MAX_CHUNKS, n_rays // RAYS_PER_CHUNK))


def grid_arrays(grid):
    """(lower, res, dims) arrays in the layout the kernels expect"""
    return (np.asarray(grid.lower, dtype=np.float64),
            np.asarray(grid.resolution, dtype=np.float64),
            np.array(grid.shape, dtype=np.int64))


def traverse(origin, direction, grid, t_max):
    """Linear ids of the voxels the segment passes through, in entry order"""
    lower, res, dims = grid_arrays(grid)
    origin = np.asarray(origin, dtype=np.float64)
    direction = np.asarray(direction, dtype=np.float64)
    out = np.empty(int(dims.sum()) + 1, dtype=np.int64)
    k = walk(origin[0], origin[1], origin[2], direction[0], direction[1], direction[2],
             float(t_max), lower, res, dims, np.empty(0), np.inf, out)
    return out[:k].copy()
