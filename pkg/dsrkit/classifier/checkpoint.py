"""Binary checkpoint format for classifiers.

Layout (all integers little-endian u32)::

    magic       8 bytes  b"DSRCKPT\\0"
    version     u32      1
    ndim        u32      rank of the input shape
    dims        ndim x u32
    layers      u32
    shapes      layers x (fan_out u32, fan_in u32)
    parameters  per layer: weights row-major, then biases, float64 little-endian
"""

import struct
from pathlib import Path

import numpy as np

from dsrkit.errors import CorruptionError, FormatError
from dsrkit.models import Classifier

MAGIC = b"DSRCKPT\0"
VERSION = 1
_U32 = struct.Struct("<I")
_U64 = struct.Struct("<Q")
_F64 = np.dtype("<f8")


class PayloadReader:
    """Sequential reader that raises CorruptionError on truncation."""

    def __init__(self, payload: bytes, kind: str = "checkpoint") -> None:
        self.payload = payload
        self.kind = kind
        self.offset = 0

    def take(self, size: int) -> bytes:
        """Next ``size`` bytes."""
        end = self.offset + size
        if end > len(self.payload):
            raise CorruptionError(
                f"{self.kind} truncated: need {end} bytes, have {len(self.payload)}"
            )
        chunk = self.payload[self.offset : end]
        self.offset = end
        return chunk

    def u32(self) -> int:
        """Next little-endian u32."""
        return int(_U32.unpack(self.take(_U32.size))[0])

    def u64(self) -> int:
        """Next little-endian u64."""
        return int(_U64.unpack(self.take(_U64.size))[0])


def save_checkpoint(model: Classifier) -> bytes:
    """Serialize a classifier.

    Raises:
        ValueError: If the classifier is invalid
    """
    problems = model.validate()
    if problems:
        raise ValueError("cannot save invalid classifier: " + "; ".join(problems))

    parts = [MAGIC, _U32.pack(VERSION), _U32.pack(len(model.input_shape))]
    parts.extend(_U32.pack(dim) for dim in model.input_shape)
    parts.append(_U32.pack(len(model.weights)))
    for w in model.weights:
        parts.append(_U32.pack(w.shape[0]))
        parts.append(_U32.pack(w.shape[1]))
    for w, b in zip(model.weights, model.biases, strict=True):
        parts.append(np.ascontiguousarray(w, dtype=_F64).tobytes())
        parts.append(np.ascontiguousarray(b, dtype=_F64).tobytes())
    return b"".join(parts)


def load_checkpoint(payload: bytes) -> Classifier:
    """Deserialize a classifier written by :func:`save_checkpoint`.

    Raises:
        FormatError: If the magic string or version is wrong
        CorruptionError: If the payload is truncated or has trailing bytes
    """
    reader = PayloadReader(payload)
    if len(payload) < len(MAGIC) or reader.take(len(MAGIC)) != MAGIC:
        raise FormatError("not a dsrkit checkpoint (bad magic)")
    version = reader.u32()
    if version != VERSION:
        raise FormatError(f"unsupported checkpoint version {version}")

    ndim = reader.u32()
    input_shape = tuple(reader.u32() for _ in range(ndim))
    layer_count = reader.u32()
    shapes = [(reader.u32(), reader.u32()) for _ in range(layer_count)]

    weights = []
    biases = []
    for fan_out, fan_in in shapes:
        w = np.frombuffer(reader.take(fan_out * fan_in * 8), dtype=_F64)
        b = np.frombuffer(reader.take(fan_out * 8), dtype=_F64)
        weights.append(w.reshape(fan_out, fan_in).astype(np.float64))
        biases.append(b.astype(np.float64))
    if reader.offset != len(payload):
        raise CorruptionError(f"{len(payload) - reader.offset} trailing bytes after checkpoint")

    model = Classifier(weights=weights, biases=biases, input_shape=input_shape)
    problems = model.validate()
    if problems:
        raise CorruptionError("checkpoint describes an invalid model: " + "; ".join(problems))
    return model


def write_checkpoint(model: Classifier, path: Path) -> Path:
    """Write a checkpoint file, creating parent directories."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(save_checkpoint(model))
    return path


def read_checkpoint(path: Path) -> Classifier:
    """Read a checkpoint file.

    Raises:
        FileNotFoundError: If the file does not exist
    """
    if not path.exists():
        raise FileNotFoundError(f"Checkpoint not found: {path}")
    return load_checkpoint(path.read_bytes())
