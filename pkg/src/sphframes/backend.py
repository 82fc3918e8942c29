"""Series backend selection.

The recurrence loops that dominate runtime (zonal series over Gegenbauer
polynomials) exist twice: a Cython extension (``sphframes._core``) and a
NumPy fallback (``sphframes._purecore``). The compiled module is preferred
when importable; setting the environment variable SPHFRAMES_PURE to a
non-empty value other than "0" forces the fallback. ``BACKEND`` reports
which one is active.
"""

import os

import numpy as np

_force_pure = os.environ.get("SPHFRAMES_PURE", "").strip() not in ("", "0")

if _force_pure:
    from . import _purecore as _impl

    COMPILED = False
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]

        COMPILED = True
    except ImportError:
        from . import _purecore as _impl

        COMPILED = False

BACKEND = "compiled" if COMPILED else "pure"


def _as_array(t):
    arr = np.ascontiguousarray(t, dtype=np.float64)
    return arr.ravel(), arr.shape, np.ndim(t) == 0


def gegenbauer_batch(l, lam, t):
    flat, shape, scalar = _as_array(t)
    out = np.asarray(_impl.gegenbauer_batch(int(l), float(lam), flat))
    return float(out[0]) if scalar else out.reshape(shape)


def zonal_series(coef, lam, t):
    coef = np.ascontiguousarray(coef, dtype=np.float64)
    flat, shape, scalar = _as_array(t)
    out = np.asarray(_impl.zonal_series(coef, float(lam), flat))
    return float(out[0]) if scalar else out.reshape(shape)


def zonal_series_dt(coef, lam, t):
    coef = np.ascontiguousarray(coef, dtype=np.float64)
    flat, shape, scalar = _as_array(t)
    out = np.asarray(_impl.zonal_series_dt(coef, float(lam), flat))
    return float(out[0]) if scalar else out.reshape(shape)
