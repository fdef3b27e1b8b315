import numpy as np
import pytest

from wvae import pnm
from wvae.data import load_cifar10, parse_cifar10, synth_dataset, upscale_bicubic
from wvae.errors import DomainError, FormatError, ShapeError
from wvae.metrics import hf_energy_ratio


def cifar_fixture():
    """Two hand-built records: labels 3 and 9, pixel bytes i % 256 and 255 - i % 256."""
    ramp = np.arange(3072) % 256
    rec1 = bytes([3]) + bytes(ramp.tolist())
    rec2 = bytes([9]) + bytes((255 - ramp).tolist())
    return rec1 + rec2, ramp


class TestCifar:
    def test_two_records(self, tmp_path):
        buf, ramp = cifar_fixture()
        path = tmp_path / "data_batch_1.bin"
        path.write_bytes(buf)
        ds = load_cifar10(str(path))
        assert ds.images.shape == (2, 3, 32, 32)
        assert ds.labels.tolist() == [3, 9]
        np.testing.assert_array_equal(ds.images[0].ravel(), ramp / 255.0)
        np.testing.assert_array_equal(ds.images[1].ravel(), (255 - ramp) / 255.0)
        # channel planes: red plane first, row-major
        assert ds.images[0, 1, 0, 0] == (1024 % 256) / 255.0
        assert ds.images[0, 0, 1, 2] == (34 % 256) / 255.0

    def test_directory(self, tmp_path):
        buf, _ = cifar_fixture()
        (tmp_path / "a.bin").write_bytes(buf)
        (tmp_path / "b.bin").write_bytes(buf[:3073])
        assert len(load_cifar10(str(tmp_path))) == 3
        assert len(load_cifar10(str(tmp_path), limit=2)) == 2

    def test_empty(self):
        assert len(parse_cifar10(b"")) == 0

    def test_bad_length(self):
        with pytest.raises(FormatError):
            parse_cifar10(bytes(3074))

    def test_bad_label(self):
        with pytest.raises(FormatError):
            parse_cifar10(bytes([10]) + bytes(3072))


class TestSynth:
    def test_constant_has_no_detail(self):
        ds = synth_dataset("constant", 5, 8, seed=1, channels=3)
        for img in ds.images:
            assert hf_energy_ratio(img, 3) == 0.0

    def test_checkerboard_period_one(self):
        img = synth_dataset("checkerboard", 1, 4, seed=0).images[0, 0]
        expect = np.array([[0, 1, 0, 1], [1, 0, 1, 0], [0, 1, 0, 1], [1, 0, 1, 0]], dtype=float)
        np.testing.assert_array_equal(img, expect)

    @pytest.mark.parametrize("kind", ["constant", "checkerboard", "gaussian-blobs", "edges"])
    def test_deterministic_and_bounded(self, kind):
        a = synth_dataset(kind, 6, 16, seed=4)
        b = synth_dataset(kind, 6, 16, seed=4)
        np.testing.assert_array_equal(a.images, b.images)
        assert a.images.min() >= 0.0 and a.images.max() <= 1.0
        assert a.images.shape == (6, 1, 16, 16)

    def test_errors(self):
        with pytest.raises(ShapeError):
            synth_dataset("edges", 2, 12)
        with pytest.raises(DomainError):
            synth_dataset("stripes", 2, 8)


class TestBicubic:
    def test_constant(self):
        out = upscale_bicubic(np.full((2, 5, 7), 0.4), 2)
        np.testing.assert_allclose(out, 0.4, atol=1e-15)
        assert out.shape == (2, 10, 14)

    @pytest.mark.parametrize("factor", [2, 4])
    def test_linear_ramp_interior(self, factor):
        n = 16
        img = np.tile(np.linspace(0.1, 0.9, n), (4, 1))  # varies along width
        out = upscale_bicubic(img, factor)
        a = 0.8 / (n - 1)
        for o in range(factor * n):
            src = (o + 0.5) / factor - 0.5
            i0 = int(np.floor(src))
            if i0 - 1 >= 0 and i0 + 2 <= n - 1:
                assert abs(out[1, o] - (0.1 + a * src)) <= 1e-6

    def test_output_clamped(self):
        img = np.zeros((8, 8))
        img[::2] = 1.0
        out = upscale_bicubic(img, 4)
        assert out.min() >= 0.0 and out.max() <= 1.0

    def test_bad_factor(self):
        with pytest.raises(DomainError):
            upscale_bicubic(np.zeros((4, 4)), 3)


class TestPNM:
    def test_roundtrip_gray(self, rng, tmp_path):
        img = np.round(rng.uniform(size=(1, 5, 7)) * 255) / 255
        path = tmp_path / "a.pgm"
        pnm.write(path, img)
        assert path.read_bytes().startswith(b"P5\n7 5\n255\n")
        np.testing.assert_array_equal(pnm.read(path), img)

    def test_roundtrip_rgb(self, rng, tmp_path):
        img = np.round(rng.uniform(size=(3, 4, 2)) * 255) / 255
        path = tmp_path / "a.ppm"
        pnm.write(path, img)
        assert path.read_bytes()[:2] == b"P6"
        np.testing.assert_array_equal(pnm.read(path), img)

    def test_round_half_up_and_clamp(self):
        q = pnm.quantize([0.5 / 255, 1.5 / 255, -0.2, 1.7, 1.0])
        assert q.tolist() == [1, 2, 0, 255, 255]

    def test_comment_in_header(self):
        img = pnm.decode(b"P5\n# comment\n2 1\n255\n\x00\xff")
        assert img.tolist() == [[[0.0, 1.0]]]

    def test_errors(self):
        with pytest.raises(FormatError):
            pnm.decode(b"P3\n1 1\n255\n0")
        with pytest.raises(FormatError):
            pnm.decode(b"P5\n2 2\n255\n\x00")
        with pytest.raises(ShapeError):
            pnm.encode(np.zeros((2, 4, 4)))
