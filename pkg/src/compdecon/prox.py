"""Proximal operators of ``K |u|^p`` (1 <= p <= 2) and of the l1 norm.

For ``x`` real, ``prox(x) = sign(x) q`` with ``q >= 0`` the unique root of
``q + p K q^(p-1) = |x|``. ``p = 1`` and ``p = 2`` have closed forms (soft
threshold and linear shrink); in between the root is found with a bracketed
Newton iteration (see :mod:`compdecon.kernels`).
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ParameterError


@dataclass(frozen=True)
class ProxParams:
    K: float
    p: float

    def __post_init__(self):
        check_params(self.K, self.p)


def check_params(K, p):
    if not np.isfinite(K) or K < 0:
        raise ParameterError(f"K must be a nonnegative real, got {K}")
    if not (1.0 <= p <= 2.0):
        raise ParameterError(f"p must lie in [1, 2], got {p}")


def prox_lp_scalar(x, params):
    K, p = params.K, params.p
    check_params(K, p)
    a = abs(float(x))
    if a == 0.0 or K == 0.0:
        return float(x)
    if p == 1.0:
        q = max(a - K, 0.0)
    elif p == 2.0:
        q = a / (1.0 + 2.0 * K)
    else:
        q = kernels.lp_root_scalar(a, K, p)
    return float(np.copysign(q, x)) if q else 0.0


def prox_lp_vector(v, params):
    """Elementwise :func:`prox_lp_scalar`; ``||.||_p^p`` is separable."""
    return prox_lp(v, params.K, params.p)


def prox_lp(v, K, p):
    check_params(K, p)
    v = np.asarray(v, dtype=np.float64)
    if K == 0.0:
        return v.copy()
    if p == 1.0:
        return soft_threshold(v, K)
    if p == 2.0:
        return v / (1.0 + 2.0 * K)
    shape = v.shape
    flat = v.ravel()
    q = kernels.lp_shrink(np.abs(flat), K, p)
    return (np.sign(flat) * q).reshape(shape)


def soft_threshold(v, K):
    v = np.asarray(v, dtype=np.float64)
    return np.sign(v) * np.maximum(np.abs(v) - K, 0.0)


def prox_l1(v, K):
    if not np.isfinite(K) or K < 0:
        raise ParameterError(f"K must be a nonnegative real, got {K}")
    return soft_threshold(v, K)


def lp_penalty(u, x, K, p):
    """Value of ``K |u|^p + (u - x)^2 / 2``, the function the prox minimizes."""
    u = np.asarray(u, dtype=np.float64)
    return K * np.abs(u) ** p + 0.5 * (u - x) ** 2


def prox_curve(xs, K, ps):
    """Columns ``prox_{K|.|^p}(xs)`` for each ``p`` in ``ps``."""
    xs = np.asarray(xs, dtype=np.float64)
    return np.column_stack([prox_lp(xs, K, p) for p in ps])
