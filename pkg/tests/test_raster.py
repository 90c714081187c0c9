"""Tests for image containers, PGM/PNG I/O and smoothing filters."""

import numpy as np
import pytest
from PIL import Image

from conftest import write_pgm
from raster import (
    GrayImage,
    ImageFormatError,
    ScalarField,
    gaussian_convolve,
    gaussian_kernel,
    gradient_magnitude,
    load_image,
    save_image,
    save_mask,
    save_overlay,
)
from raster.pnm import decode_pgm, encode_pgm


class TestContainers:
    def test_gray_image_rejects_out_of_range(self):
        with pytest.raises(ValueError, match=r"\[0, 1\]"):
            GrayImage(np.full((4, 4), 1.5))

    def test_gray_image_rejects_tiny(self):
        with pytest.raises(ValueError, match=">= 3"):
            GrayImage(np.zeros((2, 5)))

    def test_scalar_field_rejects_nan(self):
        data = np.zeros((4, 4))
        data[1, 1] = np.nan
        with pytest.raises(ValueError, match="NaN"):
            ScalarField(data)

    def test_data_is_read_only_copy(self):
        source = np.zeros((4, 5))
        image = GrayImage(source)
        source[0, 0] = 1.0
        assert image.data[0, 0] == 0.0
        assert image.shape == (4, 5)
        assert (image.width, image.height) == (5, 4)
        with pytest.raises(ValueError):
            image.data[0, 0] = 0.5


class TestPgm:
    def test_plain_with_comments(self, tmp_path):
        path = tmp_path / "comment.pgm"
        path.write_bytes(b"P2\n# made by hand\n3 3 # width height\n4\n0 1 2\n3 4 0\n0 0 0\n")
        image = load_image(path)
        assert image.data[0, 2] == pytest.approx(0.5)
        assert image.data[1, 1] == 1.0

    def test_raw_sixteen_bit(self):
        samples = np.array([[0, 1000, 65535]] * 3, dtype=np.int64)
        decoded, maxval = decode_pgm(encode_pgm(samples, 65535))
        assert maxval == 65535
        assert np.array_equal(decoded, samples)

    def test_truncated_body(self):
        with pytest.raises(ImageFormatError, match="declared 4x4"):
            decode_pgm(b"P5\n4 4\n255\n" + bytes(10))

    def test_sample_above_maxval(self):
        with pytest.raises(ImageFormatError, match="exceeds maxval"):
            decode_pgm(b"P2 3 3 10 0 0 0 0 11 0 0 0 0")

    def test_plain_body_shorter_than_header(self):
        with pytest.raises(ImageFormatError, match="declared 4x4"):
            decode_pgm(b"P2 4 4 255 " + b"0 " * 15)

    def test_non_integer_header(self):
        with pytest.raises(ImageFormatError, match="not an integer"):
            decode_pgm(b"P2 three 3 255 0")

    def test_unknown_magic(self, tmp_path):
        path = tmp_path / "color.ppm"
        path.write_bytes(b"P6\n3 3\n255\n" + bytes(27))
        with pytest.raises(ImageFormatError, match="Unsupported image format"):
            load_image(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ImageFormatError, match="Cannot read image"):
            load_image(tmp_path / "nope.pgm")


class TestPng:
    def test_grayscale_png(self, tmp_path):
        path = tmp_path / "gray.png"
        Image.fromarray(np.array([[0, 255, 51]] * 3, dtype=np.uint8)).save(path)
        image = load_image(path)
        assert image.data[0, 1] == 1.0
        assert image.data[2, 2] == pytest.approx(0.2)

    def test_color_png_rejected(self, tmp_path):
        path = tmp_path / "rgb.png"
        Image.new("RGB", (4, 4)).save(path)
        with pytest.raises(ImageFormatError, match="RGB"):
            load_image(path)


class TestWriters:
    def test_image_quantizes_to_eight_bits(self, tmp_path):
        path = tmp_path / "out.pgm"
        save_image(GrayImage(np.linspace(0, 1, 16).reshape(4, 4)), path)
        samples, maxval = decode_pgm(path.read_bytes())
        assert maxval == 255
        assert samples[0, 0] == 0 and samples[-1, -1] == 255

    def test_mask_values(self, tmp_path):
        mask = np.zeros((5, 5), dtype=bool)
        mask[1:3, 1:3] = True
        path = tmp_path / "mask.pgm"
        save_mask(mask, path)
        samples, _ = decode_pgm(path.read_bytes())
        assert set(np.unique(samples)) == {0, 255}
        assert np.array_equal(samples == 255, mask)

    def test_overlay_contrasts_with_background(self, tmp_path):
        data = np.zeros((5, 5))
        data[:, 3:] = 1.0
        front = np.zeros((5, 5), dtype=bool)
        front[2, 0] = front[2, 4] = True
        path = tmp_path / "overlay.png"
        save_overlay(GrayImage(data), front, path)
        samples = np.asarray(Image.open(path))
        assert samples[2, 0] == 255
        assert samples[2, 4] == 0
        assert samples[0, 0] == 0

    def test_no_temporary_left_behind(self, tmp_path):
        save_mask(np.ones((3, 3), dtype=bool), tmp_path / "m.pgm")
        assert [p.name for p in tmp_path.iterdir()] == ["m.pgm"]

    def test_pgm_write_read_preserves_levels(self, tmp_path):
        path = write_pgm(tmp_path / "in.pgm", [[0, 255, 0], [255, 0, 255], [0, 0, 0]])
        image = load_image(path)
        save_image(image, tmp_path / "again.pgm")
        assert np.array_equal(load_image(tmp_path / "again.pgm").data, image.data)


class TestFilters:
    @pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0])
    def test_kernel_normalized_and_symmetric(self, sigma):
        kernel = gaussian_kernel(sigma)
        assert kernel.sum() == pytest.approx(1.0)
        assert np.allclose(kernel, kernel.T)
        assert np.allclose(kernel, kernel[::-1, ::-1])

    def test_kernel_rejects_nonpositive_sigma(self):
        with pytest.raises(ValueError, match="positive"):
            gaussian_kernel(0.0)

    def test_constant_image_unchanged(self):
        image = GrayImage.constant(9, 7, 0.3)
        assert np.allclose(gaussian_convolve(image, 2.0).data, 0.3)

    def test_smoothing_stays_in_input_range(self):
        rng = np.random.default_rng(3)
        image = GrayImage(rng.uniform(0.2, 0.7, size=(20, 20)))
        smoothed = gaussian_convolve(image, 1.5).data
        assert smoothed.min() >= image.data.min()
        assert smoothed.max() <= image.data.max()

    def test_mirror_equivariant(self):
        rng = np.random.default_rng(4)
        data = rng.uniform(size=(16, 16))
        plain = gaussian_convolve(GrayImage(data), 1.0).data
        mirrored = gaussian_convolve(GrayImage(data[:, ::-1]), 1.0).data
        assert np.array_equal(plain[:, ::-1], mirrored)

    def test_impulse_reproduces_kernel(self):
        kernel = gaussian_kernel(1.0)
        radius = kernel.shape[0] // 2
        data = np.zeros((21, 21))
        data[10, 10] = 1.0
        smoothed = gaussian_convolve(GrayImage(data), 1.0).data
        window = smoothed[10 - radius : 11 + radius, 10 - radius : 11 + radius]
        assert smoothed[10, 10] == pytest.approx(kernel[radius, radius])
        assert np.allclose(window, kernel)

    def test_gradient_of_ramp(self):
        ramp = np.tile(np.arange(10) / 10.0, (6, 1))
        assert np.allclose(gradient_magnitude(ramp).data, 0.1)
