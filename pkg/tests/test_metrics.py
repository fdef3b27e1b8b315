import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from wvae.data import synth_dataset
from wvae.errors import ShapeError
from wvae.metrics import MetricReport, bce, evaluate, hf_energy_ratio, mse, sparsity_stats, ssim
from wvae.wavelet import WaveletPyramid2D, dwt2d_multi


def ssim_bruteforce(x, y, win=8, dr=1.0):
    """Scalar-loop SSIM over every window; independent of both kernels."""
    gx = x if x.ndim == 2 else x.mean(axis=0)
    gy = y if y.ndim == 2 else y.mean(axis=0)
    c1, c2 = (0.01 * dr) ** 2, (0.03 * dr) ** 2
    vals = []
    for i in range(gx.shape[0] - win + 1):
        for j in range(gx.shape[1] - win + 1):
            a = [float(v) for v in gx[i:i + win, j:j + win].ravel()]
            b = [float(v) for v in gy[i:i + win, j:j + win].ravel()]
            n = len(a)
            ma, mb = math.fsum(a) / n, math.fsum(b) / n
            va = math.fsum((p - ma) ** 2 for p in a) / n
            vb = math.fsum((q - mb) ** 2 for q in b) / n
            cab = math.fsum((p - ma) * (q - mb) for p, q in zip(a, b)) / n
            vals.append(((2 * ma * mb + c1) * (2 * cab + c2))
                        / ((ma * ma + mb * mb + c1) * (va + vb + c2)))
    return math.fsum(vals) / len(vals)


def box_blur(img):
    pad = np.pad(img, ((0, 0), (0, 1), (0, 1)), mode="edge")
    return 0.25 * (pad[:, :-1, :-1] + pad[:, 1:, :-1] + pad[:, :-1, 1:] + pad[:, 1:, 1:])


class TestPixelMetrics:
    def test_mse(self, rng):
        x = rng.uniform(size=(3, 4, 4))
        assert mse(x, x) == 0.0
        assert mse([0.0, 1.0], [1.0, 1.0]) == 0.5
        y = rng.uniform(size=x.shape)
        assert mse(x, y) == mse(y, x)

    def test_mse_bruteforce(self, rng):
        x, y = rng.uniform(size=(2, 2, 5, 6))
        ref = math.fsum((float(a) - float(b)) ** 2 for a, b in zip(x.ravel(), y.ravel())) / x.size
        assert abs(mse(x, y) - ref) <= 1e-12

    def test_bce_values(self):
        assert abs(bce([0.5], [0.5]) - math.log(2)) <= 1e-12
        assert bce([1.0], [1.0]) < 1e-6
        assert np.isfinite(bce([1.0, 0.0], [0.0, 1.0]))

    def test_bce_bruteforce(self, rng):
        x = rng.uniform(size=40)
        y = rng.uniform(0.01, 0.99, size=40)
        ref = math.fsum(-(a * math.log(b) + (1 - a) * math.log(1 - b)) for a, b in zip(x, y)) / 40
        assert abs(bce(x, y) - ref) <= 1e-12

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            mse(np.zeros(3), np.zeros(4))
        with pytest.raises(ShapeError):
            bce(np.zeros(3), np.zeros(4))


class TestSSIM:
    def test_identity(self, rng):
        x = rng.uniform(size=(3, 16, 16))
        assert abs(ssim(x, x) - 1.0) <= 1e-9

    def test_checkerboard_inverse_negative(self):
        x = synth_dataset("checkerboard", 1, 16, 0).images[0]
        got = ssim(x, 1.0 - x)
        ref = ssim_bruteforce(x, 1.0 - x)
        assert ref < 0
        assert abs(got - ref) <= 1e-12

    def test_matches_bruteforce(self, rng):
        x = rng.uniform(size=(3, 12, 10))
        y = np.clip(x + rng.normal(scale=0.2, size=x.shape), 0, 1)
        assert abs(ssim(x, y) - ssim_bruteforce(x, y)) <= 1e-12

    def test_symmetric(self, rng):
        x, y = rng.uniform(size=(2, 16, 16))
        assert abs(ssim(x, y) - ssim(y, x)) <= 1e-15

    def test_too_small(self):
        with pytest.raises(ShapeError):
            ssim(np.zeros((4, 4)), np.zeros((4, 4)))


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (2, 10, 9), elements=st.floats(0, 1)),
       arrays(np.float64, (2, 10, 9), elements=st.floats(0, 1)))
def test_ssim_range(x, y):
    v = ssim(x, y)
    assert -1.0 <= v <= 1.0
    if not np.array_equal(x.mean(axis=0), y.mean(axis=0)):
        assert v < 1.0 or abs(v - 1.0) <= 1e-9


class TestSparsity:
    def test_zero_details(self):
        p = dwt2d_multi(np.full((4, 4), 0.5), 2)
        assert sparsity_stats(p) == (0.0, 1.0)

    def test_spec_case(self):
        # four detail values [1, 0, 0, 0] spread over the three bands
        p = WaveletPyramid2D(approx=np.zeros((1, 1, 1)),
                             details=[(np.array([[[1.0, 0.0]]]), np.zeros((1, 1, 1)),
                                       np.zeros((1, 1, 1)))])
        assert sparsity_stats(p, 0.5) == (0.25, 0.75)

    def test_sign_invariant(self, rng):
        p = dwt2d_multi(rng.normal(size=(8, 8)), 2)
        q = WaveletPyramid2D(p.approx, [tuple(-b for b in t) for t in p.details])
        assert sparsity_stats(p) == sparsity_stats(q)


class TestHighFrequencyRatio:
    def test_constant(self):
        assert hf_energy_ratio(np.full((8, 8), 0.3), 3) == 0.0

    def test_impulse(self):
        x = np.zeros((4, 4))
        x[0, 0] = 1.0
        assert abs(hf_energy_ratio(x, 1) - 0.75) <= 1e-15

    def test_range(self, rng):
        for _ in range(10):
            v = hf_energy_ratio(rng.normal(size=(2, 8, 8)), 2)
            assert 0.0 <= v <= 1.0

    @pytest.mark.parametrize("seed", range(5))
    def test_blur_reduces_ratio(self, seed):
        rng = np.random.default_rng(seed)
        img = synth_dataset("gaussian-blobs", 1, 16, seed).images[0]
        img = np.clip(img + rng.normal(scale=0.05, size=img.shape), 0, 1)
        assert hf_energy_ratio(box_blur(img), 2) <= hf_energy_ratio(img, 2)


def test_report_json_roundtrip(rng):
    x = rng.uniform(size=(2, 1, 8, 8))
    y = np.clip(x + 0.05, 0, 1)
    rep = evaluate(x, y, dwt2d_multi(y, 2), 2)
    assert isinstance(rep, MetricReport)
    import json
    d = json.loads(rep.to_json())
    assert set(d) >= {"mse", "bce", "ssim", "detail_l1_mean", "detail_near_zero_fraction",
                      "hf_energy_ratio"}
    assert 0.0 <= d["detail_near_zero_fraction"] <= 1.0
