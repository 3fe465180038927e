"""Pure-Python (numpy) kernels: prism ray casting and CART split sweep.

These mirror the compiled extension in ``_kernels.pyx`` operation-for-operation
so either backend yields identical results. Selected in ``kernels``.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"

# Parametric containment tolerance for facade/roof hits; ties count as hits.
PARAM_TOL = 1e-9


def ray_hits(origin, direction, facades, roof_offsets, roof_verts, roof_heights,
             t_min, t_max, exclude_facade=-1):
    """True iff the ray origin + t*direction (t in [t_min, t_max]) hits any surface.

    facades: (m, 5) float64 rows [x1, y1, x2, y2, height], edge p1->p2 with the
    building interior on its right (counter-clockwise footprints). Roofs are the
    footprint polygons at z = height. ``exclude_facade`` skips one facade row.
    """
    ox, oy, oz = origin
    dx, dy, dz = direction

    if facades.shape[0]:
        x1 = facades[:, 0]
        y1 = facades[:, 1]
        ex = facades[:, 2] - x1
        ey = facades[:, 3] - y1
        h = facades[:, 4]
        nx = ey
        ny = -ex
        den = nx * dx + ny * dy
        num = nx * (x1 - ox) + ny * (y1 - oy)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = num / den
            hx = ox + t * dx
            hy = oy + t * dy
            hz = oz + t * dz
            s = ((hx - x1) * ex + (hy - y1) * ey) / (ex * ex + ey * ey)
            zp = hz / h
        ok = (
            (den != 0.0)
            & (t >= t_min)
            & (t <= t_max)
            & (s >= -PARAM_TOL)
            & (s <= 1.0 + PARAM_TOL)
            & (zp >= -PARAM_TOL)
            & (zp <= 1.0 + PARAM_TOL)
        )
        if exclude_facade >= 0:
            ok[exclude_facade] = False
        if ok.any():
            return True

    for b in range(len(roof_heights)):
        if dz == 0.0:
            break
        t = (roof_heights[b] - oz) / dz
        if t < t_min or t > t_max:
            continue
        px = ox + t * dx
        py = oy + t * dy
        verts = roof_verts[roof_offsets[b]:roof_offsets[b + 1]]
        if _point_in_polygon(px, py, verts):
            return True
    return False


def _point_in_polygon(px, py, verts):
    """Even-odd crossing test."""
    x = verts[:, 0]
    y = verts[:, 1]
    x2 = np.roll(x, -1)
    y2 = np.roll(y, -1)
    crosses = (y > py) != (y2 > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = x + (py - y) * (x2 - x) / (y2 - y)
    return bool(np.count_nonzero(crosses & (px < xint)) % 2)


def best_split(X, y, min_samples_leaf=1, min_impurity_decrease=0.0):
    """Best (feature, threshold, gini decrease) over all midpoint candidates.

    Ties break to the lowest feature index, then the lowest threshold.
    Returns None when no candidate achieves a positive decrease of at least
    ``min_impurity_decrease``.

    Candidates are ranked by the score (sql*nr + sqr*nl) / (nl*nr), which is
    monotone in the decrease. The score is one correctly rounded division of
    exactly representable integers, so candidates whose decreases are equal
    as rationals compare bit-equal and the strict-maximum sweep preserves the
    tie-break order regardless of how the counts are partitioned.
    """
    n = y.shape[0]
    total = np.bincount(y, minlength=3).astype(np.int64)
    parent_g = 1.0 - float(total[0] * total[0] + total[1] * total[1] + total[2] * total[2]) / (
        float(n) * float(n)
    )

    best = None  # (score, feature, threshold)
    onehot = np.zeros((n, 3), dtype=np.int64)
    for f in range(X.shape[1]):
        order = np.argsort(X[:, f], kind="stable")
        v = X[order, f]
        onehot[:] = 0
        onehot[np.arange(n), y[order]] = 1
        cum = np.cumsum(onehot, axis=0)

        nl = np.arange(1, n, dtype=np.int64)
        nr = n - nl
        cand = (v[:-1] != v[1:]) & (nl >= min_samples_leaf) & (nr >= min_samples_leaf)
        if not cand.any():
            continue
        cl = cum[:-1]
        cr = total[np.newaxis, :] - cl
        sql = cl[:, 0] * cl[:, 0] + cl[:, 1] * cl[:, 1] + cl[:, 2] * cl[:, 2]
        sqr = cr[:, 0] * cr[:, 0] + cr[:, 1] * cr[:, 1] + cr[:, 2] * cr[:, 2]
        score = (sql * nr + sqr * nl).astype(np.float64) / (nl * nr).astype(np.float64)
        score = np.where(cand, score, -np.inf)
        i = int(np.argmax(score))
        s = float(score[i])
        if best is None or s > best[0]:
            thr = (v[i] + v[i + 1]) / 2.0
            best = (s, f, thr)

    if best is None:
        return None
    dec = parent_g - (float(n) - best[0]) / float(n)
    if dec <= 0.0 or dec < min_impurity_decrease:
        return None
    return best[1], best[2], dec
