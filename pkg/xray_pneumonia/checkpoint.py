"""
XRNET1 checkpoint format.

Layout:
    b"XRNET1\\n"
    uint32 little-endian header length
    UTF-8 JSON header (sorted keys, compact separators)
    little-endian float64 payload, tensors in header table order

The header holds the architecture tag, head, image size, seed, config echo,
optional channel averages, layer descriptors and the tensor table. Encoding
is canonical, so save → load → save reproduces the same bytes.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union
import json
import logging

import numpy as np
from pydantic import ValidationError

from .errors import CheckpointError
from .layers import LAYER_REGISTRY, LayerStack
from .models.core import ChannelAverages, TrainConfig
from .models.enums import Architecture, HeadKind
from .tensor_core import Rng
from .training.architectures import build_model

logger = logging.getLogger("cli.checkpoint")

PathLike = Union[str, Path]

MAGIC = b"XRNET1\n"
_LENGTH_BYTES = 4
_DTYPE = np.dtype("<f8")


@dataclass
class Checkpoint:
    model: LayerStack
    config: TrainConfig
    averages: Optional[ChannelAverages] = None


def _tensors(model: LayerStack) -> List[Tuple[str, str, np.ndarray]]:
    params = [(name, "param", value) for name, value in model.named_parameters()]
    buffers = [(name, "buffer", value) for name, value in model.named_buffers()]
    return params + buffers


def encode_checkpoint(model: LayerStack, config: TrainConfig, averages: Optional[ChannelAverages] = None) -> bytes:
    """Serialize a model with its config echo."""
    tensors = _tensors(model)
    header = {
        "arch": model.arch.value,
        "head": model.head.value,
        "image_size": model.image_size,
        "seed": config.seed,
        "config": config.echo(),
        "averages": averages.model_dump() if averages is not None else None,
        "layers": model.describe(),
        "tensors": [{"name": name, "kind": kind, "shape": list(value.shape)} for name, kind, value in tensors]
    }
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    payload = b"".join(np.ascontiguousarray(value, dtype=_DTYPE).tobytes() for _, _, value in tensors)
    return MAGIC + len(header_bytes).to_bytes(_LENGTH_BYTES, "little") + header_bytes + payload


def _parse_header(data: bytes) -> Tuple[Dict[str, Any], int]:
    if not data.startswith(MAGIC):
        raise CheckpointError("not an XRNET1 checkpoint (bad magic)")
    start = len(MAGIC)
    if len(data) < start + _LENGTH_BYTES:
        raise CheckpointError("truncated checkpoint header length")
    length = int.from_bytes(data[start:start + _LENGTH_BYTES], "little")
    body = start + _LENGTH_BYTES
    if len(data) < body + length:
        raise CheckpointError("truncated checkpoint header")
    try:
        header = json.loads(data[body:body + length].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"checkpoint header is not valid JSON: {exc}") from exc
    if not isinstance(header, dict):
        raise CheckpointError("checkpoint header must be a JSON object")
    return header, body + length


def decode_checkpoint(data: bytes) -> Checkpoint:
    """
    Rebuild the model and config stored in checkpoint bytes.

    Raises:
        CheckpointError: bad magic, malformed header, unknown layer type,
            tensor table mismatch or payload size mismatch
    """
    header, offset = _parse_header(data)
    try:
        config = TrainConfig.model_validate(header["config"])
        averages = ChannelAverages.model_validate(header["averages"]) if header.get("averages") else None
        arch = Architecture(header["arch"])
        head = HeadKind(header["head"])
        layers = [LAYER_REGISTRY.build(desc) for desc in header["layers"]]
        table = header["tensors"]
        model = LayerStack(layers, arch, head, header.get("image_size"))
    except (KeyError, TypeError, ValueError, ValidationError) as exc:
        raise CheckpointError(f"malformed checkpoint header: {exc}") from exc

    if not isinstance(table, list) or not all(isinstance(entry, dict) for entry in table):
        raise CheckpointError("checkpoint tensor table must be a list of objects")
    tensors = _tensors(model)
    expected = [(name, kind, list(value.shape)) for name, kind, value in tensors]
    stored = [(entry.get("name"), entry.get("kind"), entry.get("shape")) for entry in table]
    if expected != stored:
        raise CheckpointError("tensor table does not match the layer descriptors")

    total = sum(value.size for _, _, value in tensors)
    payload = data[offset:]
    if len(payload) != total * _DTYPE.itemsize:
        raise CheckpointError(f"payload has {len(payload)} bytes, expected {total * _DTYPE.itemsize}")

    values = np.frombuffer(payload, dtype=_DTYPE)
    position = 0
    for _, _, target in tensors:
        np.copyto(target, values[position:position + target.size].reshape(target.shape))
        position += target.size

    return Checkpoint(model=model, config=config, averages=averages)


def save_checkpoint(
    path: PathLike,
    model: LayerStack,
    config: TrainConfig,
    averages: Optional[ChannelAverages] = None
) -> None:
    path = Path(path)
    data = encode_checkpoint(model, config, averages)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)
    logger.info(f"wrote checkpoint {path} ({len(data)} bytes, {model.parameter_count()} parameters)")


def load_checkpoint(path: PathLike) -> Checkpoint:
    """
    Raises:
        CheckpointError: unreadable or malformed file
    """
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    return decode_checkpoint(data)


def check_compatible(checkpoint: Checkpoint, config: TrainConfig) -> None:
    """
    Verify a stored model matches the architecture a config would build.

    Raises:
        CheckpointError: architecture or layer shapes differ
    """
    try:
        reference = build_model(config, Rng(config.seed))
    except ValueError as exc:
        raise CheckpointError(f"config cannot build a model: {exc}") from exc
    if reference.arch != checkpoint.model.arch:
        raise CheckpointError(
            f"architecture mismatch: checkpoint {checkpoint.model.arch.value}, config {reference.arch.value}"
        )
    if reference.describe() != checkpoint.model.describe():
        raise CheckpointError("layer shapes of the checkpoint do not match the config")
