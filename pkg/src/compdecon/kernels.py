"""Hot numeric kernels with a compiled and a pure-numpy path.

Two kernels dominate the solver's inner loop:

* ``fwht``: orthonormal fast Walsh-Hadamard transform (Sylvester ordering),
  the base transform of the structurally random measurement operator.
* ``lp_shrink``: elementwise root of ``q + p*K*q**(p-1) = a`` for
  ``1 < p < 2``, the magnitude part of the lp proximal operator.

``fwht`` and ``lp_shrink`` dispatch to the numba build when available; the
``*_numpy`` and ``*_numba`` names stay importable so the two can be
benchmarked and cross-checked.
"""

import math

import numpy as np

from ._accel import HAVE_NUMBA, njit

RESIDUAL_TOL = 1e-12
MAX_ROOT_ITERS = 100
# below this the q**(p-2) derivative term is unreliable; bisect instead
NEWTON_FLOOR = 1e-14


def _fwht_inplace(a):
    n = a.shape[0]
    h = 1
    while h < n:
        for i in range(0, n, 2 * h):
            for j in range(i, i + h):
                u = a[j]
                v = a[j + h]
                a[j] = u + v
                a[j + h] = u - v
        h *= 2
    scale = 1.0 / math.sqrt(n)
    for j in range(n):
        a[j] *= scale


def fwht_numpy(x):
    """Orthonormal Walsh-Hadamard transform of a length-2^k vector."""
    a = np.array(x, dtype=np.float64, copy=True)
    n = a.shape[0]
    h = 1
    while h < n:
        a = a.reshape(n // (2 * h), 2, h)
        a = np.stack((a[:, 0] + a[:, 1], a[:, 0] - a[:, 1]), axis=1)
        h *= 2
    return a.reshape(n) / math.sqrt(n)


def _lp_root(a, K, p, tol, maxiter):
    if a <= 0.0:
        return 0.0
    pk = p * K
    hi = a
    ratio = a / pk
    expo = 1.0 / (p - 1.0)
    # skip the bound when it would overflow (it then exceeds a anyway)
    if ratio <= 1.0 or math.log(ratio) * expo < 700.0:
        ub = ratio ** expo
        if ub < hi:
            hi = ub
    if hi <= 0.0:
        # root underflows double precision
        return 0.0
    lo = 0.0
    q = hi
    for _ in range(maxiter):
        # one pow per step: q^(p-1) = q * q^(p-2) away from zero
        if q > NEWTON_FLOOR:
            w = q ** (p - 2.0)
            g = q + pk * q * w - a
        else:
            w = 0.0
            g = q + pk * q ** (p - 1.0) - a
        if abs(g) < tol:
            return q
        if g > 0.0:
            hi = q
        else:
            lo = q
        if hi - lo <= 2.220446049250313e-16 * hi:
            return q
        qn = -1.0
        if q > NEWTON_FLOOR:
            qn = q - g / (1.0 + pk * (p - 1.0) * w)
        if not (lo < qn <= hi):
            qn = 0.5 * (lo + hi)
        q = qn
    return q


def _lp_shrink_loop(a, K, p, tol, maxiter):
    out = np.empty_like(a)
    for i in range(a.shape[0]):
        out[i] = _lp_root(a[i], K, p, tol, maxiter)
    return out


def lp_shrink_numpy(a, K, p, tol=RESIDUAL_TOL, maxiter=MAX_ROOT_ITERS):
    """Vectorized safeguarded Newton solve of ``q + p K q^(p-1) = a``.

    ``a`` holds nonnegative magnitudes; ``K > 0`` and ``1 < p < 2``.
    """
    a = np.asarray(a, dtype=np.float64)
    pk = p * K
    with np.errstate(over="ignore", under="ignore", divide="ignore"):
        ub = (a / pk) ** (1.0 / (p - 1.0))
    hi = np.minimum(a, ub)
    q = hi.copy()
    lo = np.zeros_like(a)
    active = hi > 0.0
    q[~active] = 0.0
    for _ in range(maxiter):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        qa, la, ha, aa = q[idx], lo[idx], hi[idx], a[idx]
        safe = qa > NEWTON_FLOOR
        w = np.where(safe, qa, 1.0) ** (p - 2.0)
        qp = np.where(safe, qa * w, qa ** (p - 1.0))
        g = qa + pk * qp - aa
        done = np.abs(g) < tol
        ha = np.where(g > 0.0, qa, ha)
        la = np.where(g > 0.0, la, qa)
        done |= ha - la <= 2.220446049250313e-16 * ha
        qn = np.where(safe, qa - g / (1.0 + pk * (p - 1.0) * w), -1.0)
        bad = ~((la < qn) & (qn <= ha))
        qn = np.where(bad, 0.5 * (la + ha), qn)
        q[idx] = np.where(done, qa, qn)
        lo[idx] = la
        hi[idx] = ha
        active[idx[done]] = False
    return q


if HAVE_NUMBA:
    _fwht_jit = njit(_fwht_inplace)
    _lp_root_jit = njit(_lp_root)
    _lp_root = _lp_root_jit
    _lp_shrink_jit = njit(_lp_shrink_loop)

    def fwht_numba(x):
        a = np.array(x, dtype=np.float64, copy=True)
        _fwht_jit(a)
        return a

    def lp_shrink_numba(a, K, p, tol=RESIDUAL_TOL, maxiter=MAX_ROOT_ITERS):
        a = np.ascontiguousarray(a, dtype=np.float64)
        return _lp_shrink_jit(a, float(K), float(p), float(tol), int(maxiter))

    fwht = fwht_numba
    lp_shrink = lp_shrink_numba
else:
    fwht_numba = None
    lp_shrink_numba = None
    fwht = fwht_numpy
    lp_shrink = lp_shrink_numpy


def lp_root_scalar(a, K, p, tol=RESIDUAL_TOL, maxiter=MAX_ROOT_ITERS):
    """Scalar version of :func:`lp_shrink` for a single magnitude."""
    return float(_lp_root(float(a), float(K), float(p), float(tol), int(maxiter)))
