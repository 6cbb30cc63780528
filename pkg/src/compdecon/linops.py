"""Linear operators of the compressive deconvolution forward model.

Images are 2-D float64 arrays; their vector view is the row-major
(lexicographic) flattening. ``y = Phi @ H @ x.ravel() + n`` where ``H`` is a
2-D circular convolution, ``Phi`` a compressive measurement operator and
``Psi`` an orthonormal wavelet synthesis.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.fft

from . import kernels, wavelets
from .errors import DimensionError, ParameterError


def _check_image(x, rows, cols):
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (rows, cols):
        if x.size == rows * cols and x.ndim == 1:
            return x.reshape(rows, cols)
        raise DimensionError(f"expected image of shape {(rows, cols)}, got {x.shape}")
    return x


# --------------------------------------------------------------------------
# circular convolution

@dataclass(frozen=True, eq=False)
class ConvolutionOperator:
    """2-D circular convolution stored by its DFT eigenvalues.

    ``eigenvalues[k, l]`` is the 2-D DFT of the kernel after zero padding to
    the grid and shifting its center pixel to index ``(0, 0)``.
    """

    rows: int
    cols: int
    eigenvalues: np.ndarray = field(repr=False)

    @property
    def shape(self):
        return (self.rows, self.cols)

    def _half(self, conj=False):
        lam = self.eigenvalues[:, : self.cols // 2 + 1]
        return np.conj(lam) if conj else lam

    def apply(self, x):
        x = _check_image(x, self.rows, self.cols)
        return scipy.fft.irfft2(scipy.fft.rfft2(x) * self._half(), s=self.shape)

    def adjoint(self, x):
        x = _check_image(x, self.rows, self.cols)
        return scipy.fft.irfft2(scipy.fft.rfft2(x) * self._half(conj=True), s=self.shape)

    def gram_eigenvalues(self):
        """Eigenvalues of ``H^T H`` (real, nonnegative)."""
        return np.abs(self.eigenvalues) ** 2


def centered_kernel_grid(psf, rows, cols):
    """Zero-pad ``psf`` to ``(rows, cols)`` with its center pixel at ``(0, 0)``."""
    psf = np.atleast_2d(np.asarray(psf, dtype=np.float64))
    kr, kc = psf.shape
    if kr > rows or kc > cols:
        raise DimensionError(f"psf {psf.shape} larger than grid {(rows, cols)}")
    padded = np.zeros((rows, cols))
    padded[:kr, :kc] = psf
    return np.roll(padded, (-(kr // 2), -(kc // 2)), axis=(0, 1))


def build_convolution(psf, rows, cols):
    psf = np.atleast_2d(np.asarray(psf, dtype=np.float64))
    if not np.any(psf):
        raise ParameterError("psf must be nonzero")
    if not np.all(np.isfinite(psf)):
        raise ParameterError("psf must be finite")
    grid = centered_kernel_grid(psf, rows, cols)
    return ConvolutionOperator(rows, cols, scipy.fft.fft2(grid))


def identity_convolution(rows, cols):
    return ConvolutionOperator(rows, cols, np.ones((rows, cols), dtype=np.complex128))


def conv_apply(op, x):
    return op.apply(x)


def conv_apply_adjoint(op, x):
    return op.adjoint(x)


# --------------------------------------------------------------------------
# sparsifying transform

@dataclass(frozen=True)
class SparsifyingTransform:
    """Orthonormal wavelet pair: ``analyze`` is Psi^-1, ``synthesize`` is Psi.

    ``kind`` is ``"db4"``, ``"haar"`` or ``"identity"``.
    """

    rows: int
    cols: int
    kind: str = "db4"
    levels: int = 3

    def __post_init__(self):
        if self.kind not in (*wavelets.FILTERS, "identity"):
            raise ParameterError(f"unknown wavelet kind {self.kind!r}")
        if self.levels < 0:
            raise ParameterError("levels must be nonnegative")
        if self.kind != "identity":
            step = 2 ** self.levels
            if self.rows % step or self.cols % step:
                raise DimensionError(
                    f"grid {(self.rows, self.cols)} not divisible by 2^{self.levels}")

    @property
    def size(self):
        return self.rows * self.cols

    def analyze(self, x):
        x = _check_image(x, self.rows, self.cols)
        if self.kind == "identity" or self.levels == 0:
            return x.ravel().copy()
        return wavelets.dwt2(x, self.kind, self.levels).ravel()

    def synthesize(self, c):
        c = np.asarray(c, dtype=np.float64)
        if c.size != self.size:
            raise DimensionError(f"expected {self.size} coefficients, got {c.size}")
        c = c.reshape(self.rows, self.cols)
        if self.kind == "identity" or self.levels == 0:
            return c.copy()
        return wavelets.idwt2(c, self.kind, self.levels)


def analyze(t, x):
    return t.analyze(x)


def synthesize(t, c):
    return t.synthesize(c)


# --------------------------------------------------------------------------
# measurement operators

def _check_mn(n, m):
    if not (0 < m <= n):
        raise ParameterError(f"need 0 < m <= n, got m={m}, n={n}")


class MeasurementOperator:
    """Base class for ``Phi: R^n -> R^m``."""

    kind = None
    orthogonal = False

    def __init__(self, n, m, seed):
        self.n = int(n)
        self.m = int(m)
        self.seed = seed

    @property
    def cs_ratio(self):
        return self.m / self.n

    def _vec(self, v, size):
        v = np.asarray(v, dtype=np.float64).ravel()
        if v.size != size:
            raise DimensionError(f"expected vector of length {size}, got {v.size}")
        return v

    def forward(self, v):
        raise NotImplementedError

    def adjoint(self, y):
        raise NotImplementedError

    def materialize(self):
        """Dense ``m x n`` matrix, built column by column (tests only)."""
        eye = np.eye(self.n)
        return np.stack([self.forward(e) for e in eye], axis=1)

    def record(self):
        return {"kind": self.kind, "n": self.n, "m": self.m, "seed": self.seed}


class SRMOperator(MeasurementOperator):
    """Structurally random matrix ``R_Omega F D`` with orthonormal rows."""

    kind = "srm"
    orthogonal = True

    def __init__(self, n, m, seed, signs, rows, base="wht"):
        super().__init__(n, m, seed)
        self.signs = signs
        self.rows = rows
        self.base = base

    def _transform(self, v):
        if self.base == "wht":
            return kernels.fwht(v)
        return scipy.fft.dct(v, type=2, norm="ortho")

    def _transform_t(self, v):
        if self.base == "wht":
            return kernels.fwht(v)
        return scipy.fft.idct(v, type=2, norm="ortho")

    def forward(self, v):
        v = self._vec(v, self.n)
        return self._transform(self.signs * v)[self.rows]

    def adjoint(self, y):
        y = self._vec(y, self.m)
        full = np.zeros(self.n)
        full[self.rows] = y
        return self.signs * self._transform_t(full)

    def record(self):
        rec = super().record()
        rec["base"] = self.base
        return rec


class GaussianOperator(MeasurementOperator):
    """Dense i.i.d. N(0, 1/m) matrix; not orthogonal in general.

    The matrix may be stored in float32 to halve memory traffic; products
    are then computed in float32 and returned as float64.
    """

    kind = "gaussian"

    def __init__(self, n, m, seed, matrix):
        super().__init__(n, m, seed)
        self.matrix = matrix

    @property
    def dtype(self):
        return self.matrix.dtype

    def forward(self, v):
        v = self._vec(v, self.n).astype(self.dtype, copy=False)
        return (self.matrix @ v).astype(np.float64, copy=False)

    def adjoint(self, y):
        y = self._vec(y, self.m).astype(self.dtype, copy=False)
        return (self.matrix.T @ y).astype(np.float64, copy=False)

    def materialize(self):
        return self.matrix.astype(np.float64)

    def record(self):
        rec = super().record()
        rec["dtype"] = self.dtype.name
        return rec


class IdentityMeasurement(MeasurementOperator):
    """``Phi = I`` (no compression); orthogonal."""

    kind = "identity"
    orthogonal = True

    def __init__(self, n):
        super().__init__(n, n, None)

    def forward(self, v):
        return self._vec(v, self.n).copy()

    def adjoint(self, y):
        return self._vec(y, self.m).copy()


SRM_BASES = ("wht", "dct")


def build_srm(seed, n, m, base="wht", randomize=True):
    """Structurally random matrix with ``Phi Phi^T = I_m``.

    ``randomize=False`` keeps the sign diagonal at +1.
    """
    _check_mn(n, m)
    if base not in SRM_BASES:
        raise ParameterError(f"unknown SRM base transform {base!r}")
    if base == "wht" and n & (n - 1):
        raise ParameterError(f"Walsh-Hadamard base needs n a power of two, got {n}")
    rng = np.random.default_rng(seed)
    signs = rng.choice(np.array([-1.0, 1.0]), size=n)
    if not randomize:
        signs = np.ones(n)
    rows = np.sort(rng.choice(n, size=m, replace=False))
    return SRMOperator(n, m, seed, signs, rows, base)


GAUSSIAN_DTYPES = ("float64", "float32")
_GAUSSIAN_CHUNK = 1024


def build_gaussian(seed, n, m, dtype="float64"):
    """Entries drawn in float64 row chunks, so both storage types hold the
    same matrix up to rounding."""
    _check_mn(n, m)
    if np.dtype(dtype).name not in GAUSSIAN_DTYPES:
        raise ParameterError(f"dtype must be one of {GAUSSIAN_DTYPES}")
    rng = np.random.default_rng(seed)
    matrix = np.empty((m, n), dtype=dtype)
    scale = 1.0 / np.sqrt(m)
    for start in range(0, m, _GAUSSIAN_CHUNK):
        rows = min(_GAUSSIAN_CHUNK, m - start)
        matrix[start:start + rows] = rng.standard_normal((rows, n)) * scale
    return GaussianOperator(n, m, seed, matrix)


def build_measurement(record):
    """Rebuild an operator from :meth:`MeasurementOperator.record` output."""
    kind = record["kind"]
    if kind == "srm":
        return build_srm(record["seed"], record["n"], record["m"], record.get("base", "wht"))
    if kind == "gaussian":
        return build_gaussian(record["seed"], record["n"], record["m"],
                              record.get("dtype", "float64"))
    if kind == "identity":
        return IdentityMeasurement(record["n"])
    raise ParameterError(f"unknown measurement kind {kind!r}")


def measure(op, v):
    return op.forward(v)


def measure_adjoint(op, y):
    return op.adjoint(y)
