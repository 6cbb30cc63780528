"""End-to-end experiment steps shared by the command line and the tests.

Every step is a pure function of a :class:`~compdecon.config.RunConfig`
and its inputs. Random draws come from the master seed via the fixed
stream offsets in :mod:`compdecon.phantom`, so a run can be replayed from
``(config, seed)`` alone.
"""

import math
import time
from dataclasses import dataclass

import numpy as np

from . import linops, metrics, phantom
from .metrics import RegionBox
from .solver import Problem, solve


@dataclass
class PhantomData:
    mask: np.ndarray
    trf: np.ndarray
    psf: np.ndarray
    rf: np.ndarray


@dataclass
class Measurement:
    y: np.ndarray
    operator: linops.MeasurementOperator
    snr_db: float

    def record(self):
        rec = self.operator.record()
        rec["snr_db"] = "inf" if math.isinf(self.snr_db) else self.snr_db
        return rec


def make_psf(cfg):
    if cfg.blur == "none":
        return np.ones((1, 1))
    return phantom.synthesize_psf(cfg.psf_spec())


def make_phantom_data(cfg):
    mask, trf = phantom.make_phantom(cfg.phantom_spec())
    psf = make_psf(cfg)
    return PhantomData(mask, trf, psf, phantom.simulate_rf(trf, psf))


def build_operator(cfg, cs_ratio=None):
    n = cfg.n
    m = cfg.measurements(cs_ratio)
    seed = phantom.stream_seed(cfg.seed, phantom.MATRIX_STREAM)
    if cfg.matrix == "identity":
        return linops.IdentityMeasurement(n)
    if cfg.matrix == "gaussian":
        return linops.build_gaussian(seed, n, m, cfg.gaussian_dtype)
    return linops.build_srm(seed, n, m, cfg.srm_base)


def compress(cfg, rf, cs_ratio=None, operator=None):
    """Measure the RF image and add noise at ``cfg.snr_db``."""
    op = operator or build_operator(cfg, cs_ratio)
    clean = op.forward(np.asarray(rf).ravel())
    noisy = phantom.add_noise_snr(clean, cfg.snr_db,
                                  phantom.stream_seed(cfg.seed, phantom.NOISE_STREAM))
    return Measurement(noisy, op, cfg.snr_db)


def build_problem(cfg, psf, measurement, p=None):
    H = linops.build_convolution(psf, cfg.rows, cfg.cols)
    Psi = linops.SparsifyingTransform(cfg.rows, cfg.cols, cfg.wavelet, cfg.levels)
    return Problem(H, Psi, measurement.operator, measurement.y,
                   cfg.alpha, cfg.mu, cfg.p if p is None else p)


def reconstruct(cfg, psf, measurement, p=None, ground_truth=None):
    problem = build_problem(cfg, psf, measurement, p)
    return solve(problem, cfg.solver_config(), ground_truth=ground_truth)


def cnr_regions(cfg):
    """CNR boxes from the config, or boxes inside the bright disc and the
    background of the default layout."""
    if cfg.cnr_region1 is not None:
        return RegionBox(*cfg.cnr_region1), RegionBox(*cfg.cnr_region2)
    r, c = cfg.rows, cfg.cols
    half = max(2, int(0.16 * min(r, c) / math.sqrt(2)) - 1)
    bright = RegionBox(round(0.30 * r) - half, round(0.32 * c) - half, 2 * half, 2 * half)
    back = RegionBox(round(0.03 * r), round(0.62 * c), 2 * half, 2 * half)
    return bright, back


def evaluate(cfg, trf, xhat, p=None, iterations=None, seconds=None, cs_ratio=None):
    r1, r2 = cnr_regions(cfg)
    try:
        r1.check(np.shape(trf))
        r2.check(np.shape(trf))
    except ValueError:
        r1 = r2 = None
    return metrics.evaluate(
        trf, xhat, r1, r2,
        cs_ratio=cfg.cs_ratio if cs_ratio is None else cs_ratio,
        p=cfg.p if p is None else p, alpha=cfg.alpha, mu=cfg.mu, beta=cfg.beta,
        iterations=iterations, seconds=seconds)


def run_cell(cfg, data, cs_ratio, p):
    """One grid cell: compress, reconstruct, evaluate. Returns (report, xhat)."""
    t0 = time.perf_counter()
    meas = compress(cfg, data.rf, cs_ratio)
    result = reconstruct(cfg, data.psf, meas, p)
    seconds = time.perf_counter() - t0
    report = evaluate(cfg, data.trf, result.x, p, result.iterations, seconds, cs_ratio)
    return report, result.x
