"""Greedy matching decoder used to read the logical class at finite defect density."""
from __future__ import annotations

import numpy as np


def _signed_short(d, L):
    # shortest signed displacement, ties resolved towards +
    d = np.mod(d, L)
    return np.where(d > L // 2, d - L, d)


def correction_homology(defects, L: int) -> int:
    """Homology bits of a greedy pairing of ``defects`` (site indices).

    Defects are paired closest-first by torus Manhattan distance (ties broken
    by index).  Each pair is joined by the short way along x, then along y.
    A straight segment starting at coordinate ``a`` with signed length ``d``
    crosses the seam iff ``a + d`` leaves ``[0, L)``; the seams of both
    sectors sit between coordinates ``L-1`` and ``0``.
    """
    defects = np.asarray(defects, dtype=np.int64)
    n = len(defects)
    if n == 0:
        return 0
    if n % 2:
        raise ValueError("cannot pair an odd number of defects")
    x, y = defects % L, defects // L
    i, j = np.triu_indices(n, k=1)
    dx = _signed_short(x[j] - x[i], L)
    dy = _signed_short(y[j] - y[i], L)
    dist = np.abs(dx) + np.abs(dy)
    order = np.lexsort((j, i, dist))
    matched = np.zeros(n, dtype=bool)
    h = 0
    left = n
    for k in order:
        a, b = i[k], j[k]
        if matched[a] or matched[b]:
            continue
        matched[a] = matched[b] = True
        ex = x[a] + dx[k]
        # the x-leg runs along row y[a]; the y-leg starts at the new row position
        ey = y[a] + dy[k]
        h ^= int(ex < 0 or ex >= L) | (int(ey < 0 or ey >= L) << 1)
        left -= 2
        if left == 0:
            break
    return h
