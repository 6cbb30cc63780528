"""Periodic orthonormal 2-D discrete wavelet transform.

Coefficients use the usual in-place Mallat layout: after ``levels`` passes
the coarse approximation sits in the top-left ``rows/2^L x cols/2^L`` block
and detail bands fill the rest. Every pass is an orthogonal map, so the
synthesis is the exact transpose of the analysis.
"""

from functools import lru_cache

import numpy as np
import scipy.sparse

_S3 = np.sqrt(3.0)
FILTERS = {
    "haar": np.array([1.0, 1.0]) / np.sqrt(2.0),
    # 4-tap Daubechies (two vanishing moments)
    "db4": np.array([1 + _S3, 3 + _S3, 3 - _S3, 1 - _S3]) / (4 * np.sqrt(2.0)),
}


def _highpass(h):
    L = len(h)
    return np.array([(-1) ** k * h[L - 1 - k] for k in range(L)])


@lru_cache(maxsize=64)
def analysis_matrix(n, wavelet):
    """Sparse ``n x n`` one-level analysis map: lowpass rows then highpass rows.

    Row ``k`` holds ``h[j]`` at column ``(2k + j) mod n``; taps that wrap onto
    the same column are summed.
    """
    h = FILTERS[wavelet]
    g = _highpass(h)
    half = n // 2
    k = np.repeat(np.arange(half), len(h))
    cols = (2 * k + np.tile(np.arange(len(h)), half)) % n
    rows = np.concatenate((k, k + half))
    vals = np.concatenate((np.tile(h, half), np.tile(g, half)))
    mat = scipy.sparse.coo_matrix((vals, (rows, np.concatenate((cols, cols)))), shape=(n, n))
    return mat.tocsr()


# below this size a dense matrix product beats the sparse one
_DENSE_MAX = 512


@lru_cache(maxsize=64)
def _pass_maps(n, wavelet):
    A = analysis_matrix(n, wavelet)
    if n <= _DENSE_MAX:
        A = A.toarray()
        return A, np.ascontiguousarray(A.T)
    return A, A.T.tocsr()


def _analysis_1d(x, wavelet, axis):
    A = _pass_maps(x.shape[axis], wavelet)[0]
    return A @ x if axis == 0 else (A @ x.T).T


def _synthesis_1d(c, wavelet, axis):
    At = _pass_maps(c.shape[axis], wavelet)[1]
    return At @ c if axis == 0 else (At @ c.T).T


def dwt2(x, wavelet="db4", levels=3):
    if wavelet not in FILTERS:
        raise KeyError(wavelet)
    c = np.array(x, dtype=np.float64, copy=True)
    r, k = c.shape
    for _ in range(levels):
        block = c[:r, :k]
        block = _analysis_1d(block, wavelet, axis=0)
        block = _analysis_1d(block, wavelet, axis=1)
        c[:r, :k] = block
        r //= 2
        k //= 2
    return c


def idwt2(c, wavelet="db4", levels=3):
    if wavelet not in FILTERS:
        raise KeyError(wavelet)
    x = np.array(c, dtype=np.float64, copy=True)
    rows, cols = x.shape
    for lev in reversed(range(levels)):
        r = rows >> lev
        k = cols >> lev
        block = x[:r, :k]
        block = _synthesis_1d(block, wavelet, axis=1)
        block = _synthesis_1d(block, wavelet, axis=0)
        x[:r, :k] = block
    return x
