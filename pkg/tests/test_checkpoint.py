import json

import numpy as np
import pytest

from xray_pneumonia.checkpoint import (
    MAGIC,
    check_compatible,
    decode_checkpoint,
    encode_checkpoint,
    load_checkpoint,
    save_checkpoint
)
from xray_pneumonia.errors import CheckpointError
from xray_pneumonia.models.core import ChannelAverages
from xray_pneumonia.tensor_core import Rng
from xray_pneumonia.training import INIT_STREAM, build_model


def _model(cfg):
    return build_model(cfg, Rng(cfg.seed).spawn(INIT_STREAM))


def _header(data):
    length = int.from_bytes(data[len(MAGIC):len(MAGIC) + 4], "little")
    return json.loads(data[len(MAGIC) + 4:len(MAGIC) + 4 + length])


class TestEncoding:
    @pytest.mark.parametrize("arch", ["cnn", "resnet"])
    def test_save_load_save_is_byte_identical(self, tiny_config, arch, tmp_path):
        cfg = tiny_config.with_overrides(arch=arch)
        model = _model(cfg)
        model["bn1"].buffers["running_mean"][:] = 0.25
        averages = ChannelAverages(r_mean=10, g_mean=20, b_mean=30)
        save_checkpoint(tmp_path / "a.xrnet", model, cfg, averages)
        loaded = load_checkpoint(tmp_path / "a.xrnet")
        save_checkpoint(tmp_path / "b.xrnet", loaded.model, loaded.config, loaded.averages)
        assert (tmp_path / "a.xrnet").read_bytes() == (tmp_path / "b.xrnet").read_bytes()
        assert loaded.config == cfg
        assert loaded.averages == averages

    def test_loaded_model_predicts_identically(self, tiny_config):
        model = _model(tiny_config)
        x = Rng(3).uniform((2, 3, 16, 16), 0, 1)
        restored = decode_checkpoint(encode_checkpoint(model, tiny_config)).model
        assert np.array_equal(model.forward(x), restored.forward(x))

    def test_header_contents(self, tiny_config):
        data = encode_checkpoint(_model(tiny_config), tiny_config)
        assert data.startswith(b"XRNET1\n")
        header = _header(data)
        assert header["arch"] == "cnn"
        assert header["seed"] == tiny_config.seed
        assert header["averages"] is None
        assert header["tensors"][0] == {"name": "conv1.kernels", "kind": "param", "shape": [4, 3, 3, 3]}

    def test_payload_is_little_endian_float64(self, tiny_config):
        model = _model(tiny_config)
        data = encode_checkpoint(model, tiny_config)
        first = model["conv1"].kernels.reshape(-1)[0]
        offset = len(MAGIC) + 4 + int.from_bytes(data[len(MAGIC):len(MAGIC) + 4], "little")
        assert np.frombuffer(data[offset:offset + 8], dtype="<f8")[0] == first


class TestDecodeErrors:
    def test_bad_magic(self, tiny_config):
        data = encode_checkpoint(_model(tiny_config), tiny_config)
        with pytest.raises(CheckpointError):
            decode_checkpoint(b"XRNET2\n" + data[len(MAGIC):])

    def test_truncated_payload(self, tiny_config):
        data = encode_checkpoint(_model(tiny_config), tiny_config)
        with pytest.raises(CheckpointError):
            decode_checkpoint(data[:-8])

    def test_truncated_header(self):
        with pytest.raises(CheckpointError):
            decode_checkpoint(MAGIC + (1000).to_bytes(4, "little") + b"{}")

    def test_unknown_layer_type(self, tiny_config):
        data = encode_checkpoint(_model(tiny_config), tiny_config)
        header = _header(data)
        header["layers"][0]["type"] = "lstm"
        body = json.dumps(header).encode()
        with pytest.raises(CheckpointError):
            decode_checkpoint(MAGIC + len(body).to_bytes(4, "little") + body)

    def test_missing_file(self, tmp_path):
        with pytest.raises(CheckpointError):
            load_checkpoint(tmp_path / "none.xrnet")


class TestCompatibility:
    def test_matching_config(self, tiny_config):
        checkpoint = decode_checkpoint(encode_checkpoint(_model(tiny_config), tiny_config))
        check_compatible(checkpoint, tiny_config.with_overrides(epochs=9))

    def test_architecture_mismatch(self, tiny_config):
        checkpoint = decode_checkpoint(encode_checkpoint(_model(tiny_config), tiny_config))
        with pytest.raises(CheckpointError):
            check_compatible(checkpoint, tiny_config.with_overrides(arch="resnet"))

    def test_shape_mismatch(self, tiny_config):
        checkpoint = decode_checkpoint(encode_checkpoint(_model(tiny_config), tiny_config))
        with pytest.raises(CheckpointError):
            check_compatible(checkpoint, tiny_config.with_overrides(hidden_units=32))
