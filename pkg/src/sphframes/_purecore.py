"""NumPy implementation of the series hot loops.

Mirror of the compiled module ``sphframes._core``; the two must agree to
floating-point roundoff. Inputs are assumed pre-validated (contiguous float64
arrays, coefficients indexed by degree l starting at 0).
"""

import numpy as np


def gegenbauer_batch(l, lam, t):
    """Gegenbauer polynomial C_l^lam evaluated on an array via the forward
    three-term recurrence l C_l = 2(l+lam-1) t C_{l-1} - (l+2 lam-2) C_{l-2}."""
    t = np.asarray(t, dtype=np.float64)
    if l == 0:
        return np.ones_like(t)
    cm1 = np.ones_like(t)
    c = 2.0 * lam * t
    for j in range(2, l + 1):
        cm1, c = c, (2.0 * (j + lam - 1.0) * t * c - (j + 2.0 * lam - 2.0) * cm1) / j
    return c


def zonal_series(coef, lam, t):
    """Sum_l coef[l] * C_l^lam(t), accumulated along the recurrence."""
    coef = np.asarray(coef, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    n_terms = coef.shape[0]
    out = np.zeros_like(t)
    if n_terms == 0:
        return out
    cm1 = np.ones_like(t)
    out += coef[0] * cm1
    if n_terms == 1:
        return out
    c = 2.0 * lam * t
    out += coef[1] * c
    for l in range(2, n_terms):
        cm1, c = c, (2.0 * (l + lam - 1.0) * t * c - (l + 2.0 * lam - 2.0) * cm1) / l
        if coef[l] != 0.0:
            out += coef[l] * c
    return out


def zonal_series_dt(coef, lam, t):
    """d/dt of zonal_series: sum_{l>=1} coef[l] * 2 lam * C_{l-1}^{lam+1}(t)."""
    coef = np.asarray(coef, dtype=np.float64)
    return 2.0 * lam * zonal_series(coef[1:], lam + 1.0, t)
