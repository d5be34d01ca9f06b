"""DDMV1 checkpoint files.

Layout (all integers little-endian):
    magic           b"DDMV1"
    payload_size    uint32
    payload:
        name        uint16 length + UTF-8 bytes
        input shape 3 x uint32
        layer count uint16
        per layer   kind, kh, kw, sh, sw, padding, activation (uint8 each),
                    in_channels, out_channels (uint32 each)
        weights     float32 tensors, layer order, then `LayerSpec.weight_shapes` order
        optimizer   uint8 flag; if set: step uint32, lr/beta1/beta2/epsilon float64,
                    then the first and second moment of every weight tensor (float32)
    crc32           uint32 over everything before it

Kernel tensors are stored height-major, then input channel, then output channel."""

import math
import struct
import zlib
from dataclasses import dataclass

import numpy as np

from dualdrive.nn.adam import AdamState
from dualdrive.nn.spec import Activation, LayerKind, LayerSpec, Padding
from .builders import ModelSpec
from .network import ModelParams, Network

MAGIC = b"DDMV1"

_HEADER = struct.Struct("<5sI")
_LAYER = struct.Struct("<7B2I")
_OPTIMIZER = struct.Struct("<I4d")
_CRC = struct.Struct("<I")

_KINDS = list(LayerKind)
_PADDINGS = list(Padding)
_ACTIVATIONS = list(Activation)

_F32 = np.dtype("<f4")


class CheckpointError(ValueError):
    """Base class for checkpoint load errors."""


class CheckpointMagicError(CheckpointError):
    """The data does not start with the DDMV1 magic."""


class CheckpointTruncatedError(CheckpointError):
    """The data ends before the declared payload and checksum."""


class CheckpointChecksumError(CheckpointError):
    """The trailing CRC32 does not match the contents."""


@dataclass
class Checkpoint:
    model: Network
    optimizer: AdamState | None = None


def _tensors(params: ModelParams, spec: ModelSpec):
    for layer, layer_params in zip(spec.layers, params):
        for name in layer.weight_shapes():
            yield layer_params[name]


def save(
    model: Network, include_optimizer: bool = False, optimizer: AdamState | None = None
) -> bytes:
    """Serialize the model. An optimizer block is written when `include_optimizer`
    is set or an optimizer state is given; without a state the moments are zero."""
    spec = model.spec
    name = spec.name.encode("utf-8")

    parts = [struct.pack("<H", len(name)), name, struct.pack("<3I", *spec.input_shape)]
    parts.append(struct.pack("<H", len(spec.layers)))
    for layer in spec.layers:
        parts.append(
            _LAYER.pack(
                _KINDS.index(layer.kind),
                *layer.kernel,
                *layer.stride,
                _PADDINGS.index(layer.padding),
                _ACTIVATIONS.index(layer.activation),
                layer.in_channels,
                layer.out_channels,
            )
        )

    for tensor in _tensors(model.params, spec):
        parts.append(np.ascontiguousarray(tensor, dtype=_F32).tobytes())

    if include_optimizer or optimizer is not None:
        if optimizer is None or not optimizer.m:
            hyper = optimizer or AdamState()
            optimizer = AdamState.zeros_like(
                model.params,
                lr=hyper.lr,
                beta1=hyper.beta1,
                beta2=hyper.beta2,
                epsilon=hyper.epsilon,
                t=hyper.t,
            )
        parts.append(b"\x01")
        parts.append(
            _OPTIMIZER.pack(
                optimizer.t,
                optimizer.lr,
                optimizer.beta1,
                optimizer.beta2,
                optimizer.epsilon,
            )
        )
        for m, v in zip(_tensors(optimizer.m, spec), _tensors(optimizer.v, spec)):
            parts.append(np.ascontiguousarray(m, dtype=_F32).tobytes())
            parts.append(np.ascontiguousarray(v, dtype=_F32).tobytes())
    else:
        parts.append(b"\x00")

    payload = b"".join(parts)
    body = _HEADER.pack(MAGIC, len(payload)) + payload
    return body + _CRC.pack(zlib.crc32(body))


class _Reader:
    def __init__(self, view: memoryview) -> None:
        self.view = view
        self.offset = 0

    def unpack(self, fmt: struct.Struct | str) -> tuple:
        if isinstance(fmt, str):
            fmt = struct.Struct(fmt)
        if self.offset + fmt.size > len(self.view):
            raise CheckpointTruncatedError("Payload ends inside a record")
        items = fmt.unpack_from(self.view, self.offset)
        self.offset += fmt.size
        return items

    def take(self, size: int) -> memoryview:
        if self.offset + size > len(self.view):
            raise CheckpointTruncatedError("Payload ends inside a record")
        chunk = self.view[self.offset : self.offset + size]
        self.offset += size
        return chunk

    def tensor(self, shape: tuple[int, ...]) -> np.ndarray:
        count = math.prod(shape)
        chunk = self.take(count * _F32.itemsize)
        return np.frombuffer(chunk, dtype=_F32).astype(np.float32).reshape(shape)


def _read_params(reader: _Reader, spec: ModelSpec) -> ModelParams:
    return [
        {name: reader.tensor(shape) for name, shape in layer.weight_shapes().items()}
        for layer in spec.layers
    ]


def load(data: bytes) -> Checkpoint:
    if len(data) < len(MAGIC) or data[: len(MAGIC)] != MAGIC:
        raise CheckpointMagicError("Not a DDMV1 checkpoint")
    if len(data) < _HEADER.size:
        raise CheckpointTruncatedError("Header is incomplete")

    _, payload_size = _HEADER.unpack_from(data, 0)
    end = _HEADER.size + payload_size
    if len(data) < end + _CRC.size:
        raise CheckpointTruncatedError(
            f"Expected {end + _CRC.size} bytes, got {len(data)}"
        )

    (stored_crc,) = _CRC.unpack_from(data, end)
    if zlib.crc32(data[:end]) != stored_crc:
        raise CheckpointChecksumError("Checkpoint CRC32 mismatch")

    reader = _Reader(memoryview(data)[_HEADER.size : end])
    (name_size,) = reader.unpack("<H")
    name = bytes(reader.take(name_size)).decode("utf-8")
    input_shape = reader.unpack("<3I")
    (layer_count,) = reader.unpack("<H")

    layers = []
    for _ in range(layer_count):
        kind, kh, kw, sh, sw, padding, activation, cin, cout = reader.unpack(_LAYER)
        layers.append(
            LayerSpec(
                _KINDS[kind],
                cin,
                cout,
                kernel=(kh, kw),
                stride=(sh, sw),
                padding=_PADDINGS[padding],
                activation=_ACTIVATIONS[activation],
            )
        )

    spec = ModelSpec(name=name, input_shape=input_shape, layers=tuple(layers))
    model = Network(spec, _read_params(reader, spec))

    (has_optimizer,) = reader.unpack("<B")
    optimizer = None
    if has_optimizer:
        t, lr, beta1, beta2, epsilon = reader.unpack(_OPTIMIZER)
        m: ModelParams = [{} for _ in spec.layers]
        v: ModelParams = [{} for _ in spec.layers]
        for index, layer in enumerate(spec.layers):
            for tensor_name, shape in layer.weight_shapes().items():
                m[index][tensor_name] = reader.tensor(shape)
                v[index][tensor_name] = reader.tensor(shape)
        optimizer = AdamState(
            lr=lr, beta1=beta1, beta2=beta2, epsilon=epsilon, t=t, m=m, v=v
        )

    return Checkpoint(model=model, optimizer=optimizer)
