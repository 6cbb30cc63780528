"""Reconstruction quality metrics and B-mode rendering."""

import csv
import io
import math
from dataclasses import asdict, dataclass, fields

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import DimensionError, ParameterError

SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _pair(x, xhat):
    x = np.asarray(x, dtype=np.float64)
    xhat = np.asarray(xhat, dtype=np.float64)
    if x.shape != xhat.shape:
        raise DimensionError(f"shape mismatch {x.shape} vs {xhat.shape}")
    return x, xhat


def psnr(x, xhat):
    """Peak SNR in dB with peak ``L = max(x)``; ``inf`` when the images agree."""
    x, xhat = _pair(x, xhat)
    err = float(np.sum((x - xhat) ** 2))
    if err == 0.0:
        return math.inf
    peak = float(np.max(x))
    return 10.0 * math.log10(x.size * peak ** 2 / err)


def ssim(x, xhat, dynamic_range=1.0):
    """Single-window SSIM over whole-image statistics.

    Inputs are expected on a common [0, 1] scale; see :func:`unit_scale`.
    """
    x, xhat = _pair(x, xhat)
    c1 = (SSIM_K1 * dynamic_range) ** 2
    c2 = (SSIM_K2 * dynamic_range) ** 2
    mx, my = x.mean(), xhat.mean()
    vx = np.mean((x - mx) ** 2)
    vy = np.mean((xhat - my) ** 2)
    cov = np.mean((x - mx) * (xhat - my))
    num = (2 * mx * my + c1) * (2 * cov + c2)
    den = (mx ** 2 + my ** 2 + c1) * (vx + vy + c2)
    return float(num / den)


def max_abs_normalize(x):
    x = np.asarray(x, dtype=np.float64)
    scale = np.max(np.abs(x))
    if scale == 0.0 or not np.isfinite(scale):
        raise ParameterError("cannot normalize an all-zero (or non-finite) image")
    return x / scale


def nmse(x, xhat):
    """Mean squared difference after scaling each image to unit max-abs."""
    x, xhat = _pair(x, xhat)
    d = max_abs_normalize(x) - max_abs_normalize(xhat)
    return float(np.sum(d ** 2) / x.size)


def unit_scale(img, reference):
    """Map signed ``img`` onto [0, 1] using the max-abs of ``reference``.

    ``-max|ref| -> 0``, ``0 -> 0.5``, ``+max|ref| -> 1``; values outside are
    clipped. Used to put a TRF and its estimate on the SSIM dynamic range.
    """
    scale = np.max(np.abs(reference))
    if scale == 0.0:
        raise ParameterError("reference image is all zero")
    return np.clip(0.5 * (np.asarray(img, dtype=np.float64) / scale + 1.0), 0.0, 1.0)


@dataclass(frozen=True)
class RegionBox:
    top: int
    left: int
    height: int
    width: int

    def __post_init__(self):
        if self.top < 0 or self.left < 0 or self.height < 1 or self.width < 1:
            raise ParameterError(f"invalid region {self}")
        if self.height * self.width < 4:
            raise ParameterError("region must cover at least 4 pixels")

    def check(self, shape):
        if self.top + self.height > shape[0] or self.left + self.width > shape[1]:
            raise ParameterError(f"region {self} outside image of shape {shape}")

    def overlaps(self, other):
        return not (self.top + self.height <= other.top
                    or other.top + other.height <= self.top
                    or self.left + self.width <= other.left
                    or other.left + other.width <= self.left)

    def extract(self, img):
        self.check(img.shape)
        return img[self.top:self.top + self.height, self.left:self.left + self.width]


def cnr(img, region1, region2):
    """Contrast-to-noise ratio ``|m1 - m2| / sqrt(s1^2 + s2^2)``.

    Intended for the pre-log envelope image (see :func:`envelope`).
    """
    img = np.asarray(img, dtype=np.float64)
    if region1.overlaps(region2):
        raise ParameterError("CNR regions must be disjoint")
    a = region1.extract(img)
    b = region2.extract(img)
    pooled = a.var() + b.var()
    if pooled == 0.0:
        raise ParameterError("zero pooled variance")
    return float(abs(a.mean() - b.mean()) / math.sqrt(pooled))


def _line_envelope(line):
    mag = np.abs(line)
    n = mag.size
    if not np.any(mag):
        return np.zeros(n)
    left = np.r_[-np.inf, mag[:-1]]
    right = np.r_[mag[1:], -np.inf]
    peaks = np.flatnonzero((mag >= left) & (mag >= right) & (mag > 0))
    # plateaus yield runs of equal peaks; keep the first of each run
    if peaks.size > 1:
        keep = np.r_[True, np.diff(peaks) > 1]
        peaks = peaks[keep]
    if peaks.size == 1:
        env = np.full(n, mag[peaks[0]])
    else:
        interp = PchipInterpolator(peaks, mag[peaks], extrapolate=False)
        env = interp(np.arange(n))
        env[: peaks[0]] = mag[peaks[0]]
        env[peaks[-1] + 1:] = mag[peaks[-1]]
    return np.maximum(env, mag)


def envelope(img):
    """Axial envelope (pre-log): local maxima of ``|img|`` per column,
    joined by monotone cubic interpolation and floored at ``|img|``."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 1:
        return _line_envelope(img)
    return np.column_stack([_line_envelope(img[:, j]) for j in range(img.shape[1])])


def log_compress(env, dynamic_range_db=40.0):
    env = np.asarray(env, dtype=np.float64)
    peak = env.max()
    if peak <= 0.0:
        return np.zeros_like(env)
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(env / peak)
    db = np.clip(db, -dynamic_range_db, 0.0)
    return (db + dynamic_range_db) / dynamic_range_db


def envelope_bmode(img, dynamic_range_db=40.0):
    """Log-compressed envelope on [0, 1] (0 dB -> 1, -DR dB and below -> 0)."""
    return log_compress(envelope(img), dynamic_range_db)


@dataclass
class MetricReport:
    psnr_db: float
    ssim: float
    nmse: float
    cnr: float = None
    cs_ratio: float = None
    p: float = None
    alpha: float = None
    mu: float = None
    beta: float = None
    iterations: int = None
    seconds: float = None

    @classmethod
    def header(cls):
        return [f.name for f in fields(cls)]

    def row(self):
        out = []
        for value in asdict(self).values():
            if value is None:
                out.append("")
            elif isinstance(value, float):
                out.append(repr(value))
            else:
                out.append(str(value))
        return out

    def to_csv(self, with_header=False):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        if with_header:
            writer.writerow(self.header())
        writer.writerow(self.row())
        return buf.getvalue()


def evaluate(trf, xhat, region1=None, region2=None, **run):
    """Compute a :class:`MetricReport` for an estimate of ``trf``.

    SSIM is taken on :func:`unit_scale` images referenced to ``trf``. CNR is
    computed on the envelope of ``xhat`` when both regions are given.
    """
    trf, xhat = _pair(trf, xhat)
    report = MetricReport(
        psnr_db=psnr(trf, xhat),
        ssim=ssim(unit_scale(trf, trf), unit_scale(xhat, trf)),
        nmse=nmse(trf, xhat),
        **run,
    )
    if region1 is not None and region2 is not None:
        report.cnr = cnr(envelope(xhat), region1, region2)
    return report
