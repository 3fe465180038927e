# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: prism ray casting and CART split sweep.

Semantics match ``_kernels_py`` exactly; see that module for the contracts.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"

PARAM_TOL = 1e-9

cdef double _PARAM_TOL = 1e-9


def ray_hits(origin, direction, cnp.ndarray[cnp.float64_t, ndim=2] facades,
             cnp.ndarray[cnp.int64_t, ndim=1] roof_offsets,
             cnp.ndarray[cnp.float64_t, ndim=2] roof_verts,
             cnp.ndarray[cnp.float64_t, ndim=1] roof_heights,
             double t_min, double t_max, long exclude_facade=-1):
    cdef double ox = origin[0], oy = origin[1], oz = origin[2]
    cdef double dx = direction[0], dy = direction[1], dz = direction[2]
    cdef Py_ssize_t m = facades.shape[0]
    cdef Py_ssize_t nb = roof_heights.shape[0]
    cdef Py_ssize_t i, b, j, k, nv, off
    cdef double x1, y1, ex, ey, h, nx, ny, den, num, t, hx, hy, hz, s, zp
    cdef double px, py, vx, vy, wx, wy, xint
    cdef bint inside

    for i in range(m):
        if i == exclude_facade:
            continue
        x1 = facades[i, 0]
        y1 = facades[i, 1]
        ex = facades[i, 2] - x1
        ey = facades[i, 3] - y1
        h = facades[i, 4]
        nx = ey
        ny = -ex
        den = nx * dx + ny * dy
        if den == 0.0:
            continue
        num = nx * (x1 - ox) + ny * (y1 - oy)
        t = num / den
        if t < t_min or t > t_max:
            continue
        hx = ox + t * dx
        hy = oy + t * dy
        hz = oz + t * dz
        s = ((hx - x1) * ex + (hy - y1) * ey) / (ex * ex + ey * ey)
        if s < -_PARAM_TOL or s > 1.0 + _PARAM_TOL:
            continue
        zp = hz / h
        if zp < -_PARAM_TOL or zp > 1.0 + _PARAM_TOL:
            continue
        return True

    if dz != 0.0:
        for b in range(nb):
            t = (roof_heights[b] - oz) / dz
            if t < t_min or t > t_max:
                continue
            px = ox + t * dx
            py = oy + t * dy
            off = roof_offsets[b]
            nv = roof_offsets[b + 1] - off
            inside = False
            k = nv - 1
            for j in range(nv):
                vx = roof_verts[off + j, 0]
                vy = roof_verts[off + j, 1]
                wx = roof_verts[off + k, 0]
                wy = roof_verts[off + k, 1]
                if (vy > py) != (wy > py):
                    xint = vx + (py - vy) * (wx - vx) / (wy - vy)
                    if px < xint:
                        inside = not inside
                k = j
            if inside:
                return True
    return False


def best_split(cnp.ndarray[cnp.float64_t, ndim=2] X,
               cnp.ndarray[cnp.int64_t, ndim=1] y,
               long min_samples_leaf=1, double min_impurity_decrease=0.0):
    cdef Py_ssize_t n = y.shape[0]
    cdef Py_ssize_t n_feat = X.shape[1]
    cdef Py_ssize_t f, i
    cdef long c0, c1, c2, t0, t1, t2, nl, nr, sql, sqr
    cdef double parent_g, score, dec, best_score
    cdef long best_feat = -1
    cdef double best_thr = 0.0
    cdef cnp.ndarray[cnp.int64_t, ndim=1] order
    cdef cnp.ndarray[cnp.float64_t, ndim=1] v
    cdef cnp.ndarray[cnp.int64_t, ndim=1] yo

    t0 = 0
    t1 = 0
    t2 = 0
    for i in range(n):
        if y[i] == 0:
            t0 += 1
        elif y[i] == 1:
            t1 += 1
        else:
            t2 += 1
    parent_g = 1.0 - <double>(t0 * t0 + t1 * t1 + t2 * t2) / (<double>n * <double>n)

    # Candidates are ranked by (sql*nr + sqr*nl) / (nl*nr): monotone in the
    # gini decrease, and a single correctly rounded integer division, so
    # rational ties compare bit-equal and the scan order settles them
    # (lowest feature index, then lowest threshold).
    best_score = -np.inf
    for f in range(n_feat):
        order = np.argsort(X[:, f], kind="stable")
        v = np.ascontiguousarray(X[:, f])[order]
        yo = y[order]
        c0 = 0
        c1 = 0
        c2 = 0
        for i in range(n - 1):
            if yo[i] == 0:
                c0 += 1
            elif yo[i] == 1:
                c1 += 1
            else:
                c2 += 1
            if v[i] == v[i + 1]:
                continue
            nl = i + 1
            nr = n - nl
            if nl < min_samples_leaf or nr < min_samples_leaf:
                continue
            sql = c0 * c0 + c1 * c1 + c2 * c2
            sqr = ((t0 - c0) * (t0 - c0) + (t1 - c1) * (t1 - c1)
                   + (t2 - c2) * (t2 - c2))
            score = <double>(sql * nr + sqr * nl) / <double>(nl * nr)
            if score > best_score:
                best_score = score
                best_feat = f
                best_thr = (v[i] + v[i + 1]) / 2.0

    if best_feat < 0:
        return None
    dec = parent_g - (<double>n - best_score) / <double>n
    if dec <= 0.0 or dec < min_impurity_decrease:
        return None
    return best_feat, best_thr, dec
