import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from xray_pneumonia.errors import ImageDecodeError, ParameterError, ShapeError
from xray_pneumonia.models.core import ChannelAverages, PreprocessConfig
from xray_pneumonia.models.enums import PreprocessMode
from xray_pneumonia.preprocess import (
    Image,
    adjust_brightness,
    adjust_contrast,
    compute_channel_averages,
    decode_netpbm,
    encode_pgm,
    encode_ppm,
    expand_color_scheme,
    images_to_batch,
    pipeline_apply,
    read_image,
    to_tensor,
    write_image,
    write_ppm
)
from xray_pneumonia.tensor_core import Rng


def _pixel(rgb):
    return Image(np.array([[rgb]], dtype=np.uint8))


def _random_image(seed, width=5, height=4):
    return Image(Rng(seed).integers(0, 256, (height, width, 3)).astype(np.uint8))


class TestImage:
    def test_rejects_wrong_channel_count(self):
        with pytest.raises(ShapeError):
            Image(np.zeros((2, 2, 4), dtype=np.uint8))

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            Image(np.full((1, 1, 3), 300))

    def test_pixels_are_read_only(self, golden_image):
        with pytest.raises(ValueError):
            golden_image.pixels[0, 0, 0] = 1

    def test_gray_replicated(self):
        img = Image.from_gray(np.array([[7, 9]], dtype=np.uint8))
        assert img.pixels[0, 1].tolist() == [9, 9, 9]


class TestBrightness:
    def test_zero_delta_is_identity(self, golden_image):
        assert adjust_brightness(golden_image, 0) == golden_image

    def test_direct_with_clamp(self):
        assert adjust_brightness(_pixel((100, 150, 200)), 60).pixels[0, 0].tolist() == [160, 210, 255]

    def test_large_negative_saturates(self, golden_image):
        assert not adjust_brightness(golden_image, -300).pixels.any()

    def test_golden(self, golden_image):
        expected = np.array(
            [[[160, 210, 255], [60, 70, 255]], [[230, 120, 90], [188, 188, 188]]], dtype=np.uint8
        )
        assert adjust_brightness(golden_image, 60).tobytes() == expected.tobytes()

    def test_input_untouched(self, golden_image):
        before = golden_image.tobytes()
        adjust_brightness(golden_image, 60)
        assert golden_image.tobytes() == before


class TestContrast:
    def test_identity(self, golden_image):
        assert adjust_contrast(golden_image, 1.0, 0.0) == golden_image

    def test_direct(self):
        assert adjust_contrast(_pixel((100, 100, 100)), 1.5, 10).pixels[0, 0, 0] == 160

    def test_saturates(self):
        assert adjust_contrast(_pixel((200, 200, 200)), 2.0, 0).pixels[0, 0, 0] == 255

    def test_golden_with_clamps(self, golden_image):
        expected = np.array(
            [[[160, 235, 255], [10, 25, 255]], [[255, 100, 55], [202, 202, 202]]], dtype=np.uint8
        )
        assert adjust_contrast(golden_image, 1.5, 10).tobytes() == expected.tobytes()

    def test_half_rounds_away_from_zero(self):
        # 0.5 * 5 = 2.5 -> 3
        assert adjust_contrast(_pixel((5, 5, 5)), 0.5, 0).pixels[0, 0, 0] == 3

    @pytest.mark.parametrize("alpha", [0.0, -1.0])
    def test_non_positive_alpha(self, golden_image, alpha):
        with pytest.raises(ParameterError):
            adjust_contrast(golden_image, alpha, 0)

    def test_monotone(self):
        ramp = Image.from_gray(np.arange(256, dtype=np.uint8).reshape(16, 16))
        out = adjust_contrast(ramp, 1.7, -20).pixels[:, :, 0].reshape(-1)
        assert np.all(np.diff(out.astype(int)) >= 0)


class TestChannelAverages:
    def test_constant_image(self):
        avgs = compute_channel_averages([Image.filled(3, 2, (128, 128, 128))])
        assert (avgs.r_mean, avgs.g_mean, avgs.b_mean) == (128, 128, 128)

    def test_black_and_white(self):
        avgs = compute_channel_averages([_pixel((0, 0, 0)), _pixel((255, 255, 255))])
        assert (avgs.r_mean, avgs.g_mean, avgs.b_mean) == (127.5, 127.5, 127.5)

    def test_matches_accumulation(self):
        images = [_random_image(seed, width=3 + seed, height=2 + seed) for seed in range(4)]
        totals = [0.0, 0.0, 0.0]
        count = 0
        for img in images:
            for row in img.pixels:
                for px in row:
                    for c in range(3):
                        totals[c] += float(px[c])
                    count += 1
        avgs = compute_channel_averages(images)
        assert_allclose(avgs.as_array(), np.array(totals) / count, atol=1e-9)

    def test_empty(self):
        with pytest.raises(ParameterError):
            compute_channel_averages([])


class TestExpansion:
    def test_unit_scale_is_identity(self, golden_image):
        avgs = ChannelAverages(r_mean=128, g_mean=128, b_mean=128)
        assert expand_color_scheme(golden_image, avgs, 128) == golden_image

    def test_direct(self):
        avgs = ChannelAverages(r_mean=160, g_mean=128, b_mean=128)
        assert expand_color_scheme(_pixel((100, 0, 0)), avgs, 128).pixels[0, 0, 0] == 125

    def test_saturates(self):
        avgs = ChannelAverages(r_mean=255, g_mean=255, b_mean=255)
        assert expand_color_scheme(_pixel((200, 200, 200)), avgs, 128).pixels[0, 0, 0] == 255

    def test_golden(self, golden_image):
        avgs = ChannelAverages(r_mean=160, g_mean=160, b_mean=160)
        expected = np.array(
            [[[125, 188, 250], [0, 13, 255]], [[213, 75, 38], [160, 160, 160]]], dtype=np.uint8
        )
        assert expand_color_scheme(golden_image, avgs, 128).tobytes() == expected.tobytes()

    def test_non_positive_denominator(self, golden_image):
        with pytest.raises(ParameterError):
            expand_color_scheme(golden_image, ChannelAverages(r_mean=1, g_mean=1, b_mean=1), 0)


class TestPipeline:
    def test_raw_identity(self, golden_image):
        assert pipeline_apply(golden_image, PreprocessConfig(), "raw") == golden_image

    def test_neutral_contrast_light(self, golden_image):
        cfg = PreprocessConfig(alpha=1.0, beta=0.0, brightness_delta=0.0)
        assert pipeline_apply(golden_image, cfg, PreprocessMode.CONTRAST_LIGHT) == golden_image

    def test_contrast_then_light(self):
        cfg = PreprocessConfig(alpha=1.5, beta=10, brightness_delta=20)
        assert pipeline_apply(_pixel((100, 100, 100)), cfg, "contrast+light").pixels[0, 0, 0] == 180

    def test_shell_spelling(self):
        cfg = PreprocessConfig(alpha=1.5, beta=10, brightness_delta=20)
        assert pipeline_apply(_pixel((100, 100, 100)), cfg, "contrast-light").pixels[0, 0, 0] == 180

    def test_unknown_mode(self, golden_image):
        with pytest.raises(ParameterError):
            pipeline_apply(golden_image, PreprocessConfig(), "sharpen")

    def test_expanded_needs_averages(self, golden_image):
        with pytest.raises(ParameterError):
            pipeline_apply(golden_image, PreprocessConfig(), "expanded")

    def test_light_only(self):
        cfg = PreprocessConfig(brightness_delta=5)
        assert pipeline_apply(_pixel((1, 2, 3)), cfg, "light").pixels[0, 0].tolist() == [6, 7, 8]

    def test_full_chain_order(self):
        cfg = PreprocessConfig(alpha=2.0, beta=0, brightness_delta=10, expansion_denominator=100)
        avgs = ChannelAverages(r_mean=50, g_mean=50, b_mean=50)
        # expand: 40 * 0.5 = 20, contrast: 40, light: 50
        assert pipeline_apply(_pixel((40, 40, 40)), cfg, "full", avgs).pixels[0, 0, 0] == 50

    def test_deterministic(self, golden_image):
        cfg = PreprocessConfig()
        first = pipeline_apply(golden_image, cfg, "contrast+light")
        second = pipeline_apply(golden_image, cfg, "contrast+light")
        assert first.tobytes() == second.tobytes()


class TestToTensor:
    def test_zero_image(self):
        assert not to_tensor(Image.filled(4, 4), 2).any()

    def test_saturated_image(self):
        assert_array_equal(to_tensor(Image.filled(4, 4, (255, 255, 255)), 3), np.ones((3, 3, 3)))

    def test_downscale_keeps_top_left(self, golden_image):
        out = to_tensor(golden_image, 1)
        assert_allclose(out[:, 0, 0], np.array([100, 150, 200]) / 255.0)

    def test_channels_first(self, golden_image):
        out = to_tensor(golden_image, 2)
        assert out.shape == (3, 2, 2)
        assert out[2, 0, 1] == 1.0

    def test_upscale_nearest(self):
        img = Image.from_gray(np.array([[0, 255]], dtype=np.uint8))
        out = to_tensor(img, 4)
        assert_array_equal(out[0, 0], [0, 0, 1, 1])

    def test_batch(self, golden_image):
        assert images_to_batch([golden_image, golden_image], 2).shape == (2, 3, 2, 2)


class TestCodec:
    def test_decode_p6_with_comment(self):
        data = b"P6\n# made by hand\n2 1\n255\n" + bytes([1, 2, 3, 4, 5, 6])
        img = decode_netpbm(data)
        assert (img.width, img.height) == (2, 1)
        assert img.pixels[0, 1].tolist() == [4, 5, 6]

    def test_decode_p5_replicates(self):
        img = decode_netpbm(b"P5 2 2 255\n" + bytes([0, 50, 100, 255]))
        assert img.pixels[1, 0].tolist() == [100, 100, 100]

    def test_bad_magic(self):
        with pytest.raises(ImageDecodeError):
            decode_netpbm(b"P3\n1 1\n255\n0 0 0\n")

    def test_unsupported_maxval(self):
        with pytest.raises(ImageDecodeError):
            decode_netpbm(b"P6\n1 1\n65535\n" + bytes(6))

    def test_short_raster(self):
        with pytest.raises(ImageDecodeError):
            decode_netpbm(b"P6\n2 2\n255\n" + bytes(5))

    def test_encode_header(self, golden_image):
        assert encode_ppm(golden_image).startswith(b"P6\n2 2\n255\n")

    def test_file_round_trip(self, tmp_path):
        img = _random_image(3, width=7, height=5)
        path = tmp_path / "img.ppm"
        write_ppm(path, img)
        assert read_image(path).tobytes() == img.tobytes()
        write_ppm(tmp_path / "again.ppm", read_image(path))
        assert (tmp_path / "again.ppm").read_bytes() == path.read_bytes()

    def test_encode_pgm_rejects_color(self, golden_image):
        with pytest.raises(ShapeError):
            encode_pgm(golden_image)

    def test_write_image_keeps_pgm_for_gray(self, tmp_path):
        gray = Image.from_gray(np.array([[0, 50], [100, 255]], dtype=np.uint8))
        path = tmp_path / "scan.pgm"
        write_image(path, gray)
        assert path.read_bytes() == b"P5\n2 2\n255\n" + bytes([0, 50, 100, 255])
        assert read_image(path).tobytes() == gray.tobytes()

    def test_write_image_color_pgm_name_still_decodes(self, tmp_path, golden_image):
        path = tmp_path / "scan.pgm"
        write_image(path, golden_image)
        assert path.read_bytes().startswith(b"P6")
        assert read_image(path).tobytes() == golden_image.tobytes()

    def test_missing_file_names_path(self, tmp_path):
        with pytest.raises(ImageDecodeError) as excinfo:
            read_image(tmp_path / "nope.ppm")
        assert "nope.ppm" in str(excinfo.value)
