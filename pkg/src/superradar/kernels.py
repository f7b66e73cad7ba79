"""Inner loops that dominate runtime, each with a numba and a numpy path.

Every public function takes ``use_numba=None`` which means "whatever
:mod:`superradar._accel` selected". Passing ``True``/``False`` forces a path;
the benchmark and the equivalence tests rely on that.
"""

import numpy as np

from superradar._accel import HAVE_NUMBA, njit


def _want_numba(use_numba):
    if use_numba is None:
        return HAVE_NUMBA
    if use_numba and not HAVE_NUMBA:
        raise RuntimeError("numba path requested but numba is unavailable")
    return bool(use_numba)


# ---------------------------------------------------------------------------
# strongest Doppler bin per (range, angle) pixel


@njit
def _doppler_peak_numba(cube):
    nr, nd, na = cube.shape
    idx = np.zeros((nr, na), dtype=np.int64)
    out = np.zeros((nr, na), dtype=np.complex128)
    for r in range(nr):
        for a in range(na):
            best = -1.0
            bi = 0
            for d in range(nd):
                z = cube[r, d, a]
                p = z.real * z.real + z.imag * z.imag
                # strict '>' keeps the lowest index on ties
                if p > best:
                    best = p
                    bi = d
            idx[r, a] = bi
            out[r, a] = cube[r, bi, a]
    return idx, out


def _doppler_peak_numpy(cube):
    power = cube.real**2 + cube.imag**2
    idx = np.argmax(power, axis=1)
    out = np.take_along_axis(cube, idx[:, None, :], axis=1)[:, 0, :]
    return idx.astype(np.int64), out.astype(np.complex128)


def doppler_peak(cube, use_numba=None):
    """Index and value of the highest-power Doppler bin for a [range, doppler, angle] cube."""
    cube = np.ascontiguousarray(cube, dtype=np.complex128)
    if _want_numba(use_numba):
        return _doppler_peak_numba(cube)
    return _doppler_peak_numpy(cube)


# ---------------------------------------------------------------------------
# greedy one-to-one matching of score-ordered detections


@njit
def _greedy_match_numba(order, ptr, cand, n_gt):
    taken = np.zeros(n_gt, dtype=np.bool_)
    matched = np.full(order.shape[0], -1, dtype=np.int64)
    for j in range(order.shape[0]):
        d = order[j]
        for c in range(ptr[d], ptr[d + 1]):
            g = cand[c]
            if not taken[g]:
                taken[g] = True
                matched[j] = g
                break
    return matched


def _greedy_match_numpy(order, ptr, cand, n_gt):
    taken = np.zeros(n_gt, dtype=bool)
    matched = np.full(order.shape[0], -1, dtype=np.int64)
    for j, d in enumerate(order.tolist()):
        for g in cand[ptr[d]:ptr[d + 1]].tolist():
            if not taken[g]:
                taken[g] = True
                matched[j] = g
                break
    return matched


def greedy_match(order, ptr, cand, n_gt, use_numba=None):
    """Walk detections in ``order`` and give each the first free candidate.

    ``ptr``/``cand`` are a CSR list of ground-truth candidates per detection,
    already sorted by preference (nearest first). Returns, for each position
    in ``order``, the matched ground-truth index or -1.
    """
    order = np.ascontiguousarray(order, dtype=np.int64)
    ptr = np.ascontiguousarray(ptr, dtype=np.int64)
    cand = np.ascontiguousarray(cand, dtype=np.int64)
    if _want_numba(use_numba):
        return _greedy_match_numba(order, ptr, cand, int(n_gt))
    return _greedy_match_numpy(order, ptr, cand, int(n_gt))


# ---------------------------------------------------------------------------
# bilinear sampling of a 2-D grid at fractional indices


@njit
def _bilinear_numba(grid, fi, fj):
    ni, nj = grid.shape
    out = np.zeros(fi.shape, dtype=np.float64)
    valid = np.zeros(fi.shape, dtype=np.bool_)
    flat_i = fi.ravel()
    flat_j = fj.ravel()
    o = out.ravel()
    v = valid.ravel()
    for t in range(flat_i.shape[0]):
        x = flat_i[t]
        y = flat_j[t]
        if not (x >= 0.0 and x <= ni - 1 and y >= 0.0 and y <= nj - 1):
            continue
        i0 = min(int(np.floor(x)), ni - 2) if ni > 1 else 0
        j0 = min(int(np.floor(y)), nj - 2) if nj > 1 else 0
        di = x - i0
        dj = y - j0
        i1 = min(i0 + 1, ni - 1)
        j1 = min(j0 + 1, nj - 1)
        o[t] = ((1.0 - di) * (1.0 - dj) * grid[i0, j0] + di * (1.0 - dj) * grid[i1, j0]
                + (1.0 - di) * dj * grid[i0, j1] + di * dj * grid[i1, j1])
        v[t] = True
    return out, valid


def _bilinear_numpy(grid, fi, fj):
    ni, nj = grid.shape
    valid = (fi >= 0) & (fi <= ni - 1) & (fj >= 0) & (fj <= nj - 1)
    x = np.where(valid, fi, 0.0)
    y = np.where(valid, fj, 0.0)
    i0 = np.minimum(np.floor(x).astype(np.int64), max(ni - 2, 0))
    j0 = np.minimum(np.floor(y).astype(np.int64), max(nj - 2, 0))
    di = x - i0
    dj = y - j0
    i1 = np.minimum(i0 + 1, ni - 1)
    j1 = np.minimum(j0 + 1, nj - 1)
    out = ((1.0 - di) * (1.0 - dj) * grid[i0, j0] + di * (1.0 - dj) * grid[i1, j0]
           + (1.0 - di) * dj * grid[i0, j1] + di * dj * grid[i1, j1])
    return np.where(valid, out, 0.0), valid


def bilinear(grid, fi, fj, use_numba=None):
    """Sample ``grid`` at fractional (row, col) indices; outside samples are 0 and flagged invalid."""
    grid = np.ascontiguousarray(grid, dtype=np.float64)
    fi = np.ascontiguousarray(fi, dtype=np.float64)
    fj = np.ascontiguousarray(fj, dtype=np.float64)
    if fi.shape != fj.shape:
        raise ValueError("index arrays must share a shape")
    if _want_numba(use_numba):
        return _bilinear_numba(grid, fi, fj)
    return _bilinear_numpy(grid, fi, fj)
