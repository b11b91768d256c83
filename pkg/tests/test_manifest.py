import numpy as np
import pytest

from xray_pneumonia.errors import ImageDecodeError, ManifestError
from xray_pneumonia.manifest import (
    load_dataset,
    load_manifest_images,
    prepare_dataset,
    read_manifest,
    write_manifest
)
from xray_pneumonia.models.core import ChannelAverages, ManifestRow, PreprocessConfig
from xray_pneumonia.models.enums import PreprocessMode
from xray_pneumonia.preprocess import Image, write_ppm


def _write(tmp_path, text):
    path = tmp_path / "manifest.csv"
    path.write_text(text)
    return path


@pytest.fixture
def two_image_manifest(tmp_path):
    write_ppm(tmp_path / "a.ppm", Image.filled(4, 4, (100, 100, 100)))
    write_ppm(tmp_path / "b.ppm", Image.filled(4, 4, (200, 50, 0)))
    return _write(tmp_path, "path,label\na.ppm,0\nb.ppm,1\n")


class TestReadManifest:
    def test_rows_in_order(self, tmp_path):
        rows = read_manifest(_write(tmp_path, "path,label\nx.ppm,1\ny.ppm,0\n"))
        assert rows == [ManifestRow(path="x.ppm", label=1), ManifestRow(path="y.ppm", label=0)]

    def test_header_only(self, tmp_path):
        assert read_manifest(_write(tmp_path, "path,label\n")) == []

    def test_bad_header(self, tmp_path):
        with pytest.raises(ManifestError) as excinfo:
            read_manifest(_write(tmp_path, "file,class\nx.ppm,1\n"))
        assert excinfo.value.line_number == 1

    def test_bad_label_names_line(self, tmp_path):
        with pytest.raises(ManifestError) as excinfo:
            read_manifest(_write(tmp_path, "path,label\nx.ppm,1\ny.ppm,2\n"))
        assert excinfo.value.line_number == 3

    def test_wrong_column_count(self, tmp_path):
        with pytest.raises(ManifestError):
            read_manifest(_write(tmp_path, "path,label\nx.ppm\n"))

    def test_empty_file(self, tmp_path):
        with pytest.raises(ManifestError):
            read_manifest(_write(tmp_path, ""))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ManifestError):
            read_manifest(tmp_path / "nope.csv")

    def test_write_then_read(self, tmp_path):
        rows = [ManifestRow(path="sub/a.ppm", label=1), ManifestRow(path="b.ppm", label=0)]
        write_manifest(tmp_path / "m.csv", rows)
        assert read_manifest(tmp_path / "m.csv") == rows


class TestLoadImages:
    def test_loads_relative_to_manifest(self, two_image_manifest):
        rows, images = load_manifest_images(two_image_manifest)
        assert len(rows) == len(images) == 2
        assert images[1].pixels[0, 0].tolist() == [200, 50, 0]

    def test_no_rows(self, tmp_path):
        with pytest.raises(ManifestError):
            load_manifest_images(_write(tmp_path, "path,label\n"))

    def test_missing_image(self, tmp_path):
        with pytest.raises(ManifestError) as excinfo:
            load_manifest_images(_write(tmp_path, "path,label\ngone.ppm,1\n"))
        assert "gone.ppm" in str(excinfo.value)

    def test_undecodable_image(self, tmp_path):
        (tmp_path / "bad.ppm").write_bytes(b"not an image")
        with pytest.raises(ImageDecodeError):
            load_manifest_images(_write(tmp_path, "path,label\nbad.ppm,0\n"))


class TestPrepareDataset:
    def test_raw_tensor(self, two_image_manifest):
        dataset, averages = load_dataset(two_image_manifest, "raw", PreprocessConfig(), 2)
        assert averages is None
        assert dataset.x.shape == (2, 3, 2, 2)
        np.testing.assert_allclose(dataset.x[0], 100 / 255.0)
        assert dataset.y.tolist() == [0, 1]
        assert dataset.paths == ["a.ppm", "b.ppm"]

    def test_expanded_computes_averages(self, two_image_manifest):
        _, averages = load_dataset(two_image_manifest, PreprocessMode.EXPANDED, PreprocessConfig(), 2)
        assert (averages.r_mean, averages.g_mean, averages.b_mean) == (150, 75, 50)

    def test_given_averages_are_used(self, two_image_manifest):
        rows, images = load_manifest_images(two_image_manifest)
        fixed = ChannelAverages(r_mean=128, g_mean=128, b_mean=128)
        dataset, used = prepare_dataset(rows, images, "expanded", PreprocessConfig(), 4, fixed)
        assert used == fixed
        np.testing.assert_allclose(dataset.x[0, 0], 100 / 255.0)
