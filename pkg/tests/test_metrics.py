import math

import numpy as np
import pytest

from compdecon import metrics
from compdecon.errors import DimensionError, ParameterError
from compdecon.metrics import MetricReport, RegionBox


def test_psnr_identical_is_infinite(rng):
    x = rng.random((8, 8))
    assert metrics.psnr(x, x) == math.inf


def test_psnr_twenty_db():
    x = np.array([1.0, 0.0, 0.0, 0.0])
    xhat = x + np.array([0.1, 0.1, 0.1, 0.1])  # ||x - xhat||^2 = 0.04
    assert metrics.psnr(x, xhat) == pytest.approx(20.0, abs=1e-12)


def test_psnr_scale_invariant(rng):
    x, xhat = rng.random((2, 16, 16))
    assert metrics.psnr(3.7 * x, 3.7 * xhat) == pytest.approx(metrics.psnr(x, xhat), abs=1e-12)


def test_psnr_decreases_with_noise(rng):
    x = rng.random((32, 32))
    noise = rng.standard_normal((32, 32))
    vals = [metrics.psnr(x, x + s * noise) for s in (0.01, 0.05, 0.2)]
    assert vals[0] > vals[1] > vals[2]


def test_ssim_identity_and_constant_case(rng):
    x = rng.random((16, 16))
    assert metrics.ssim(x, x) == 1.0
    got = metrics.ssim(np.ones((4, 4)), np.zeros((4, 4)))
    c1, c2 = 1e-4, 9e-4
    assert got == pytest.approx(c1 * c2 / ((1 + c1) * c2), rel=1e-12)
    assert got == pytest.approx(9.999e-5, rel=1e-4)


def test_ssim_range_and_symmetry(rng):
    for _ in range(1000):
        a, b = rng.random((2, 6, 6))
        if rng.random() < 0.5:
            b = 1 - a + 0.05 * rng.random((6, 6))
        s = metrics.ssim(a, b)
        assert -1.0 <= s <= 1.0
        assert s == pytest.approx(metrics.ssim(b, a), abs=1e-15)


def test_nmse_examples(rng):
    x = rng.standard_normal((8, 8))
    assert metrics.nmse(x, x) == 0.0
    xbar = x / np.abs(x).max()
    assert metrics.nmse(x, -x) == pytest.approx(4.0 / x.size * np.sum(xbar ** 2), rel=1e-12)
    y = rng.standard_normal((8, 8))
    assert metrics.nmse(2.0 * x, 0.5 * y) == pytest.approx(metrics.nmse(x, y), rel=1e-12)
    z = y * np.abs(x).max() / np.abs(y).max()
    assert metrics.nmse(x, z) == pytest.approx(metrics.nmse(z, x), rel=1e-12)
    with pytest.raises(ParameterError):
        metrics.nmse(np.zeros((2, 2)), x[:2, :2])
    with pytest.raises(DimensionError):
        metrics.nmse(x, x[:4])


def test_cnr_examples(rng):
    img = np.zeros((4, 8))
    # region 1: values 2 +/- sqrt(0.5); region 2: values 1 +/- sqrt(0.5)
    s = math.sqrt(0.5)
    img[:2, :2] = [[2 + s, 2 - s], [2 + s, 2 - s]]
    img[2:, 4:6] = [[1 + s, 1 - s], [1 + s, 1 - s]]
    r1, r2 = RegionBox(0, 0, 2, 2), RegionBox(2, 4, 2, 2)
    assert metrics.cnr(img, r1, r2) == pytest.approx(1.0, rel=1e-12)
    flat = rng.random((10, 10))
    flat[5:, 5:] = flat[:5, :5]
    assert metrics.cnr(flat, RegionBox(0, 0, 5, 5), RegionBox(5, 5, 5, 5)) == pytest.approx(0.0, abs=1e-12)
    img2 = rng.random((10, 10))
    a, b = RegionBox(0, 0, 4, 4), RegionBox(5, 5, 4, 4)
    assert metrics.cnr(img2 + 7.0, a, b) == pytest.approx(metrics.cnr(img2, a, b), rel=1e-10)


def test_cnr_validation():
    img = np.ones((6, 6))
    with pytest.raises(ParameterError):
        metrics.cnr(img, RegionBox(0, 0, 2, 2), RegionBox(3, 3, 2, 2))  # zero variance
    with pytest.raises(ParameterError):
        metrics.cnr(img, RegionBox(0, 0, 3, 3), RegionBox(2, 2, 3, 3))  # overlap
    with pytest.raises(ParameterError):
        RegionBox(0, 0, 1, 3)
    with pytest.raises(ParameterError):
        metrics.cnr(img, RegionBox(0, 0, 2, 2), RegionBox(5, 5, 2, 2))


def test_envelope_of_tone_is_flat():
    n = np.arange(400)
    line = 3.0 * np.cos(2 * np.pi * 0.06 * n + 0.3)
    env = metrics.envelope(line)
    core = env[20:-20]
    assert np.max(np.abs(core - 3.0)) < 0.05 * 3.0


def test_envelope_passes_through_maxima(rng):
    line = np.abs(np.convolve(rng.random(200), np.ones(5) / 5, mode="same"))
    env = metrics.envelope(line)
    assert np.all(env >= line)
    interior = (line[1:-1] >= line[:-2]) & (line[1:-1] >= line[2:])
    idx = np.flatnonzero(interior) + 1
    np.testing.assert_allclose(env[idx], line[idx])


def test_envelope_zero_line_and_image_columns(rng):
    img = rng.standard_normal((64, 5))
    img[:, 2] = 0.0
    env = metrics.envelope(img)
    assert env.shape == img.shape
    np.testing.assert_array_equal(env[:, 2], 0.0)
    np.testing.assert_allclose(env[:, 0], metrics.envelope(img[:, 0]))


def test_bmode_scale_invariant_and_range(rng):
    img = rng.standard_normal((64, 16))
    b = metrics.envelope_bmode(img, 40.0)
    assert b.min() >= 0.0 and b.max() == 1.0
    np.testing.assert_allclose(metrics.envelope_bmode(5.0 * img, 40.0), b, atol=1e-12)


def test_metric_report_csv():
    rep = MetricReport(30.5, 0.8, 0.001, cs_ratio=0.4, p=1.0, iterations=12)
    text = rep.to_csv(with_header=True)
    header, row = text.strip().split("\n")
    assert header == "psnr_db,ssim,nmse,cnr,cs_ratio,p,alpha,mu,beta,iterations,seconds"
    assert row == "30.5,0.8,0.001,,0.4,1.0,,,,12,"


def test_evaluate_perfect_reconstruction(rng):
    trf = rng.standard_normal((16, 16))
    rep = metrics.evaluate(trf, trf)
    assert rep.psnr_db == math.inf and rep.ssim == 1.0 and rep.nmse == 0.0
