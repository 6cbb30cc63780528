import math

import numpy as np
import pytest
from scipy import stats

from compdecon import linops, phantom
from compdecon.errors import DimensionError, ParameterError
from compdecon.phantom import PhantomSpec, PsfSpec, Region

from conftest import dense_bccb, rel_err


def test_single_full_region_gives_ones():
    spec = PhantomSpec(16, 16, [Region("rect", (0, 0, 16, 16), 1.0)])
    np.testing.assert_array_equal(phantom.generate_mask(spec), 1.0)


def test_weight_zero_region_is_exactly_zero():
    spec = PhantomSpec(32, 32, [Region("rect", (0, 0, 32, 32), 0.5), Region("disc", (16, 16, 6), 0.0)])
    mask = phantom.generate_mask(spec)
    inside = Region("disc", (16, 16, 6), 0.0).raster(32, 32)
    assert np.all(mask[inside] == 0.0)
    assert np.all(mask[~inside] == 0.5)


def test_last_listed_region_wins():
    regions = [Region("rect", (0, 0, 8, 8), 0.2), Region("rect", (2, 2, 4, 4), 0.9)]
    mask = phantom.generate_mask(PhantomSpec(8, 8, regions))
    assert mask[3, 3] == 0.9 and mask[0, 0] == 0.2


@pytest.mark.parametrize("radius", [5.0, 11.5, 20.0])
def test_disc_pixel_count_matches_area(radius):
    r = Region("disc", (32, 32, radius), 1.0)
    count = int(r.raster(64, 64).sum())
    assert abs(count - math.pi * radius ** 2) <= 2 * math.pi * radius


def test_rect_pixel_count_exact():
    assert Region("rect", (3, 4, 10, 7), 1.0).raster(32, 32).sum() == 70


def test_default_layout_has_four_levels():
    mask = phantom.generate_mask(PhantomSpec())
    assert mask.shape == (128, 128)
    assert len(np.unique(mask)) == 4


def test_region_validation():
    with pytest.raises(ParameterError):
        Region("rect", (0, 0, 4, 4), 1.5)
    with pytest.raises(ParameterError):
        Region("ellipse", (0, 0, 4), 0.5)
    with pytest.raises(ParameterError):
        PhantomSpec(16, 16, [Region("disc", (2, 2, 5), 0.5)])


def excess_kurtosis(x):
    return stats.kurtosis(x, fisher=True)


def test_ggd_gaussian_kurtosis():
    x = phantom.sample_ggd(10 ** 6, 2.0, 1.0, seed=1)
    assert abs(excess_kurtosis(x)) < 0.15


def test_ggd_laplacian_kurtosis():
    x = phantom.sample_ggd(10 ** 6, 1.0, 1.0, seed=2)
    assert abs(excess_kurtosis(x) - 3.0) < 0.3


def test_ggd_variance_matches_theory():
    # Var = scale^2 Gamma(3/p) / Gamma(1/p)
    p = 1.5
    x = phantom.sample_ggd(400_000, p, 2.0, seed=3)
    expected = 4.0 * math.gamma(3 / p) / math.gamma(1 / p)
    assert x.var() == pytest.approx(expected, rel=0.02)


def test_ggd_determinism_and_validation():
    a = phantom.sample_ggd(100, 1.5, 1.0, seed=9)
    assert a.tobytes() == phantom.sample_ggd(100, 1.5, 1.0, seed=9).tobytes()
    with pytest.raises(ParameterError):
        phantom.sample_ggd(10, 0.5)
    with pytest.raises(ParameterError):
        phantom.sample_ggd(10, 1.0, scale=0.0)


def test_trf_examples(rng):
    amps = rng.standard_normal(64)
    np.testing.assert_array_equal(phantom.synthesize_trf(np.zeros((8, 8)), amps), 0.0)
    np.testing.assert_array_equal(phantom.synthesize_trf(np.ones((8, 8)), amps), amps.reshape(8, 8))
    with pytest.raises(DimensionError):
        phantom.synthesize_trf(np.ones((8, 8)), amps[:10])


def test_trf_regional_variance_scales_with_weight_squared():
    regions = [Region("rect", (0, 0, 128, 64), 0.3), Region("rect", (0, 64, 128, 64), 0.9)]
    spec = PhantomSpec(128, 128, regions, amplitude_shape=1.0, seed=5)
    mask, trf = phantom.make_phantom(spec)
    ratio = trf[:, 64:].var() / trf[:, :64].var()
    assert ratio == pytest.approx((0.9 / 0.3) ** 2, rel=0.1)
    assert np.array_equal(trf != 0, mask != 0)


def test_psf_norm_and_symmetry():
    psf = phantom.synthesize_psf(PsfSpec())
    assert abs(np.linalg.norm(psf) - 1.0) < 1e-12
    np.testing.assert_allclose(psf, psf[::-1, :], atol=1e-15)
    np.testing.assert_allclose(psf, psf[:, ::-1], atol=1e-15)
    assert psf.shape[0] % 2 == 1 and psf.shape[1] % 2 == 1


def test_psf_axial_spectrum_peaks_at_center_frequency():
    spec = PsfSpec()
    psf = phantom.synthesize_psf(spec)
    axial = psf[:, psf.shape[1] // 2]
    nfft = 512
    spectrum = np.abs(np.fft.rfft(axial, nfft))
    freqs = np.fft.rfftfreq(nfft, d=1 / spec.sampling_frequency_axial)
    bin_width = freqs[1]
    assert abs(freqs[np.argmax(spectrum)] - spec.center_frequency) <= bin_width


def test_psf_bandwidth_definition():
    spec = PsfSpec()
    psf = phantom.synthesize_psf(spec)
    axial = psf[:, psf.shape[1] // 2]
    nfft = 8192
    spectrum = np.abs(np.fft.rfft(axial, nfft))
    freqs = np.fft.rfftfreq(nfft, d=1 / spec.sampling_frequency_axial)
    above = freqs[spectrum >= spectrum.max() / 2]
    width = above.max() - above.min()
    assert width == pytest.approx(spec.fractional_bandwidth * spec.center_frequency, rel=0.05)


def test_psf_validation():
    with pytest.raises(ParameterError):
        PsfSpec(center_frequency=12e6)
    with pytest.raises(ParameterError):
        PsfSpec(lateral_sigma=0.0)


def test_simulate_rf(rng):
    trf = rng.standard_normal((16, 16))
    impulse = np.zeros((3, 3))
    impulse[1, 1] = 1.0
    np.testing.assert_allclose(phantom.simulate_rf(trf, impulse), trf, atol=1e-14)
    psf = phantom.synthesize_psf(PsfSpec(kernel_rows=9, kernel_cols=5))
    rf = phantom.simulate_rf(trf, psf)
    assert rel_err(rf.ravel(), dense_bccb(psf, 16, 16) @ trf.ravel()) < 1e-10
    assert rel_err(phantom.simulate_rf(2.5 * trf, psf), 2.5 * rf) < 1e-12


def test_noise_snr():
    y = np.sin(np.arange(100_000) * 0.01) + 0.3
    np.testing.assert_array_equal(phantom.add_noise_snr(y, math.inf), y)
    noisy = phantom.add_noise_snr(y, 40.0, seed=4)
    snr = 10 * math.log10(np.sum(y ** 2) / np.sum((noisy - y) ** 2))
    assert abs(snr - 40.0) < 0.1
    assert noisy.tobytes() == phantom.add_noise_snr(y, 40.0, seed=4).tobytes()
    with pytest.raises(ParameterError):
        phantom.add_noise_snr(np.zeros(10), 20.0)


def test_stream_seeds_distinct_and_stable():
    seeds = [phantom.stream_seed(7, s) for s in range(4)]
    assert len(set(seeds)) == 4
    assert seeds == [phantom.stream_seed(7, s) for s in range(4)]
    assert phantom.stream_seed(8, 0) != seeds[0]
