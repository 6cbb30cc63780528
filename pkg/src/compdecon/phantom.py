"""Synthetic ultrasound data: reflectivity phantoms, PSF, RF images, noise.

The tissue reflectivity function (TRF) is a piecewise-constant echogenicity
mask multiplied pixelwise by i.i.d. generalized-Gaussian scatterer
amplitudes. RF images are the circular convolution of the TRF with a
Gaussian-modulated cosine PSF (axial along rows, lateral along columns).

Randomness is derived from one master seed through independent streams,
see :func:`stream_seed`.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError
from .linops import build_convolution

# stream offsets for sub-seeding a master seed
MASK_STREAM = 0
AMPLITUDE_STREAM = 1
MATRIX_STREAM = 2
NOISE_STREAM = 3


def stream_seed(master, stream):
    """Integer seed for ``stream`` derived from ``master`` via ``SeedSequence``."""
    seq = np.random.SeedSequence(entropy=int(master), spawn_key=(int(stream),))
    return int(seq.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class Region:
    """``kind`` is ``"rect"`` (top, left, height, width) or ``"disc"``
    (center_row, center_col, radius)."""

    kind: str
    params: tuple
    weight: float

    def __post_init__(self):
        if self.kind not in ("rect", "disc"):
            raise ParameterError(f"unknown region kind {self.kind!r}")
        expected = 4 if self.kind == "rect" else 3
        if len(self.params) != expected:
            raise ParameterError(f"{self.kind} needs {expected} parameters")
        if not 0.0 <= self.weight <= 1.0:
            raise ParameterError(f"region weight must lie in [0, 1], got {self.weight}")

    def raster(self, rows, cols):
        ii, jj = np.mgrid[0:rows, 0:cols]
        if self.kind == "rect":
            top, left, height, width = self.params
            return (ii >= top) & (ii < top + height) & (jj >= left) & (jj < left + width)
        cr, cc, radius = self.params
        return (ii - cr) ** 2 + (jj - cc) ** 2 <= radius ** 2

    def check_bounds(self, rows, cols):
        if self.kind == "rect":
            top, left, height, width = self.params
            ok = top >= 0 and left >= 0 and top + height <= rows and left + width <= cols
        else:
            cr, cc, radius = self.params
            ok = (cr - radius >= -0.5 and cc - radius >= -0.5
                  and cr + radius <= rows - 0.5 and cc + radius <= cols - 0.5)
        if not ok:
            raise ParameterError(f"region {self} extends outside the {rows}x{cols} grid")


def default_regions(rows, cols):
    """Background plus two discs and a rectangle of distinct echogenicity."""
    return [
        Region("rect", (0, 0, rows, cols), 0.3),
        Region("disc", (0.30 * rows, 0.32 * cols, 0.16 * min(rows, cols)), 1.0),
        Region("disc", (0.68 * rows, 0.70 * cols, 0.17 * min(rows, cols)), 0.05),
        Region("rect", (round(0.60 * rows), round(0.10 * cols),
                        round(0.28 * rows), round(0.30 * cols)), 0.65),
    ]


@dataclass
class PhantomSpec:
    rows: int = 128
    cols: int = 128
    regions: list = None
    amplitude_shape: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ParameterError("grid must be at least 1x1")
        if self.regions is None:
            self.regions = default_regions(self.rows, self.cols)
        if not 1.0 <= self.amplitude_shape <= 2.0:
            raise ParameterError("amplitude_shape must lie in [1, 2]")
        for region in self.regions:
            region.check_bounds(self.rows, self.cols)


@dataclass
class PsfSpec:
    center_frequency: float = 3.5e6
    sampling_frequency_axial: float = 20e6
    fractional_bandwidth: float = 0.6
    lateral_sigma: float = 1.0
    kernel_rows: int = None
    kernel_cols: int = None

    def __post_init__(self):
        if not 0 < self.center_frequency < self.sampling_frequency_axial / 2:
            raise ParameterError("need 0 < center_frequency < sampling_frequency_axial / 2")
        if not self.fractional_bandwidth > 0 or not self.lateral_sigma > 0:
            raise ParameterError("bandwidth and lateral sigma must be positive")

    @property
    def axial_sigma(self):
        """Axial envelope std in samples; the -6 dB spectral width equals
        ``fractional_bandwidth * center_frequency``."""
        sigma_f = self.fractional_bandwidth * self.center_frequency / (2 * math.sqrt(2 * math.log(2)))
        return self.sampling_frequency_axial / (2 * math.pi * sigma_f)

    def kernel_shape(self):
        kr = self.kernel_rows or 2 * math.ceil(3 * self.axial_sigma) + 1
        kc = self.kernel_cols or 2 * math.ceil(3 * self.lateral_sigma) + 1
        return kr, kc


def generate_mask(spec):
    """Echogenicity map; overlapping regions resolve last-listed-wins."""
    mask = np.zeros((spec.rows, spec.cols))
    for region in spec.regions:
        mask[region.raster(spec.rows, spec.cols)] = region.weight
    return mask


def sample_ggd(n, shape, scale=1.0, seed=None):
    """Generalized Gaussian samples with density ~ exp(-|x/scale|^shape)."""
    if not 1.0 <= shape <= 2.0:
        raise ParameterError(f"GGD shape must lie in [1, 2], got {shape}")
    if not scale > 0:
        raise ParameterError("scale must be positive")
    rng = np.random.default_rng(seed)
    w = rng.gamma(1.0 / shape, 1.0, size=n)
    sign = rng.choice(np.array([-1.0, 1.0]), size=n)
    return sign * scale * w ** (1.0 / shape)


def synthesize_trf(mask, amplitudes):
    mask = np.asarray(mask, dtype=np.float64)
    amplitudes = np.asarray(amplitudes, dtype=np.float64)
    if amplitudes.size != mask.size:
        raise DimensionError(f"{amplitudes.size} amplitudes for a {mask.shape} mask")
    return mask * amplitudes.reshape(mask.shape)


def synthesize_psf(spec):
    """Separable Gaussian-modulated cosine, centered, unit l2 norm."""
    kr, kc = spec.kernel_shape()
    i = np.arange(kr) - kr // 2
    j = np.arange(kc) - kc // 2
    axial = (np.exp(-i ** 2 / (2 * spec.axial_sigma ** 2))
             * np.cos(2 * np.pi * spec.center_frequency * i / spec.sampling_frequency_axial))
    lateral = np.exp(-j ** 2 / (2 * spec.lateral_sigma ** 2))
    psf = np.outer(axial, lateral)
    return psf / np.linalg.norm(psf)


def simulate_rf(trf, psf):
    trf = np.asarray(trf, dtype=np.float64)
    return build_convolution(psf, *trf.shape).apply(trf)


def add_noise_snr(y, snr_db, seed=None):
    """Add white Gaussian noise with variance ``||y||^2 / (m 10^(snr/10))``."""
    y = np.asarray(y, dtype=np.float64)
    if math.isinf(snr_db) and snr_db > 0:
        return y.copy()
    power = float(np.sum(y ** 2))
    if power == 0.0:
        raise ParameterError("cannot set a finite SNR on an all-zero signal")
    sigma = math.sqrt(power / (y.size * 10.0 ** (snr_db / 10.0)))
    rng = np.random.default_rng(seed)
    return y + sigma * rng.standard_normal(y.shape)


def make_phantom(spec):
    """Mask and TRF for ``spec`` (amplitudes from the amplitude stream)."""
    mask = generate_mask(spec)
    amps = sample_ggd(mask.size, spec.amplitude_shape, 1.0,
                      stream_seed(spec.seed, AMPLITUDE_STREAM))
    return mask, synthesize_trf(mask, amps)
