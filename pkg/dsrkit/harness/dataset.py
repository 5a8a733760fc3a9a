"""Synthetic labelled image sets and their binary file format.

Each class has a template: a faint low-frequency cosine field keyed by the
class index plus, for classes above 0, a Walsh-coded pattern of mid and
high block-DCT cosines repeated in every full 8x8 tile. Examples scale the
coarse half of that pattern by a random gain, add smooth per-tile shading
and white grain, all proportional to ``noise_sigma``, and are clipped to
[0, 1]. With ``noise_sigma = 0`` every example equals its template. The
set is split into train and test parts by a seeded shuffle.

Dataset file layout (little-endian)::

    magic       8 bytes  b"DSRDATA\\0"
    version     u32      1
    split       u32      0 = train, 1 = test
    ndim        u32      rank of the image shape
    dims        ndim x u32
    count       u64      number of examples
    classes     u32      class count K
    images      count x prod(dims) float64
    labels      count x int64
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from dsrkit.classifier.checkpoint import PayloadReader
from dsrkit.errors import ConfigError, CorruptionError, FormatError
from dsrkit.models import LabeledDataset, Split
from dsrkit.numerics.dct import BLOCK, idct2_block
from dsrkit.numerics.random import RandomSource

logger = logging.getLogger(__name__)

MAGIC = b"DSRDATA\0"
VERSION = 1
MAX_CLASSES = 10
MIN_IMAGE_SIZE = 8

SMOOTH_AMPLITUDE = 0.02
# (row, column) frequencies of the class code; the first COARSE_COUNT are
# mid-band, the rest high-band
DETAIL_COEFFICIENTS = (
    (0, 6), (1, 6), (3, 4), (1, 5), (2, 5), (5, 2), (5, 3), (6, 0),
    (6, 5), (6, 6), (5, 6), (7, 4), (4, 5), (5, 5), (6, 4), (7, 6),
)  # fmt: skip
COARSE_COUNT = 8
COARSE_AMPLITUDE = 0.12
FINE_AMPLITUDE = 0.10
# per-example gain on the coarse code is exp(JITTER_SCALE * sigma * U(-1, 1))
JITTER_SCALE = 12.0
# shading covers row/column frequencies below SHADING_BAND with std SHADING_SCALE * sigma
SHADING_SCALE = 5.0
SHADING_BAND = 4
_U32 = struct.Struct("<I")
_U64 = struct.Struct("<Q")
_F64 = np.dtype("<f8")
_I64 = np.dtype("<i8")
_SPLIT_TAGS = {Split.TRAIN: 0, Split.TEST: 1}


@dataclass
class DatasetSpec:
    """Shape and noise of a synthetic dataset.

    Attributes:
        image_size: Height and width in pixels
        num_classes: Class count, 2..10
        per_class: Examples generated per class
        noise_sigma: Standard deviation of the Gaussian texture
        train_fraction: Share of the shuffled examples used for training
    """

    image_size: int = 16
    num_classes: int = 4
    per_class: int = 500
    noise_sigma: float = 0.08
    train_fraction: float = 0.8

    def validate(self) -> list[str]:
        """Validate the generator settings.

        Returns:
            List of validation error messages. Empty list if valid.
        """
        errors = []
        if not 2 <= self.num_classes <= MAX_CLASSES:
            errors.append(f"num_classes must lie in 2..{MAX_CLASSES}, got {self.num_classes}")
        if self.image_size < MIN_IMAGE_SIZE:
            errors.append(f"image_size must be >= {MIN_IMAGE_SIZE}, got {self.image_size}")
        if self.per_class < 1:
            errors.append(f"per_class must be >= 1, got {self.per_class}")
        if not self.noise_sigma >= 0.0:
            errors.append(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if not 0.0 < self.train_fraction < 1.0:
            errors.append(f"train_fraction must lie in (0, 1), got {self.train_fraction}")
        return errors

    def is_valid(self) -> bool:
        """Check if the generator settings are valid."""
        return len(self.validate()) == 0


def _walsh_signs(label: int) -> NDArray[np.float64]:
    """Signs (-1)^popcount(label & c) over the detail coefficients."""
    parity = [bin(label & c).count("1") % 2 for c in range(len(DETAIL_COEFFICIENTS))]
    return np.where(np.array(parity) == 1, -1.0, 1.0)


def _detail_blocks(label: int) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Coarse and fine halves of the class code as 8x8 DCT coefficient blocks.

    Both are zero for class 0.
    """
    coarse = np.zeros((BLOCK, BLOCK))
    fine = np.zeros((BLOCK, BLOCK))
    if label == 0:
        return coarse, fine
    for c, ((u, v), sign) in enumerate(zip(DETAIL_COEFFICIENTS, _walsh_signs(label), strict=True)):
        if c < COARSE_COUNT:
            coarse[u, v] = COARSE_AMPLITUDE * sign
        else:
            fine[u, v] = FINE_AMPLITUDE * sign
    return coarse, fine


def _tile(blocks: NDArray[np.float64], size: int) -> NDArray[np.float64]:
    """Images of side ``size`` from per-tile coefficients shaped (..., nt, nt, 8, 8).

    Pixels outside the full tiles stay zero.
    """
    nt = blocks.shape[-3]
    lead = blocks.shape[:-4]
    spatial = idct2_block(blocks).swapaxes(-3, -2).reshape(*lead, nt * BLOCK, nt * BLOCK)
    out = np.zeros((*lead, size, size))
    out[..., : nt * BLOCK, : nt * BLOCK] = spatial
    return out


def _repeat_tiles(block: NDArray[np.float64], size: int) -> NDArray[np.float64]:
    """One 8x8 coefficient block placed in every full tile of a ``size`` image."""
    nt = size // BLOCK
    return _tile(np.broadcast_to(block, (nt, nt, BLOCK, BLOCK)), size)


def class_template(label: int, size: int) -> NDArray[np.float64]:
    """Noise-free image of one class.

    Example:
        >>> t = class_template(0, 8)
        >>> t.shape, bool(0.0 < t.min() and t.max() < 1.0)
        ((8, 8), True)
    """
    fx = label % 3 + 1
    fy = label // 3 + 1
    i = np.arange(size, dtype=np.float64)[:, None]
    j = np.arange(size, dtype=np.float64)[None, :]
    smooth = np.cos(np.pi * fx * (j + 0.5) / size) * np.cos(np.pi * fy * (i + 0.5) / size)
    coarse, fine = _detail_blocks(label)
    return 0.5 + SMOOTH_AMPLITUDE * smooth + _repeat_tiles(coarse + fine, size)


def _class_examples(
    label: int, count: int, size: int, sigma: float, rng: RandomSource
) -> NDArray[np.float64]:
    """Unclipped examples of one class: template, coarse gain, shading and grain."""
    template = class_template(label, size)
    coarse, _ = _detail_blocks(label)
    gain = np.exp(JITTER_SCALE * sigma * rng.uniform_range(-1.0, 1.0, count))
    nt = size // BLOCK
    shading = np.zeros((count, nt, nt, BLOCK, BLOCK))
    shading[..., :SHADING_BAND, :SHADING_BAND] = (
        SHADING_SCALE * sigma * rng.normal((count, nt, nt, SHADING_BAND, SHADING_BAND))
    )
    grain = sigma * rng.normal((count, size, size))
    return (
        template[None, ...]
        + (gain - 1.0)[:, None, None] * _repeat_tiles(coarse, size)[None, ...]
        + _tile(shading, size)
        + grain
    )


def generate_dataset(spec: DatasetSpec, seed: int) -> tuple[LabeledDataset, LabeledDataset]:
    """Generate the train and test splits of a synthetic dataset.

    Args:
        spec: Generator settings
        seed: Seed for the per-example variation and the split shuffle

    Returns:
        ``(train, test)`` datasets

    Raises:
        ConfigError: If the settings are invalid

    Example:
        >>> train, test = generate_dataset(DatasetSpec(per_class=10), seed=1)
        >>> len(train), len(test)
        (32, 8)
    """
    problems = spec.validate()
    if problems:
        raise ConfigError("invalid dataset spec: " + "; ".join(problems))

    rng = RandomSource(seed)
    size = spec.image_size
    images = [
        _class_examples(label, spec.per_class, size, spec.noise_sigma, rng.child(label + 1))
        for label in range(spec.num_classes)
    ]
    stacked = np.clip(np.concatenate(images, axis=0), 0.0, 1.0)
    labels = np.repeat(np.arange(spec.num_classes, dtype=np.int64), spec.per_class)

    order = rng.child(0).permutation(len(labels))
    n_train = int(round(spec.train_fraction * len(labels)))
    if not 0 < n_train < len(labels):
        raise ConfigError(f"split of {len(labels)} examples leaves an empty part")
    train_idx, test_idx = order[:n_train], order[n_train:]
    logger.info(
        "Generated %d train / %d test images (%d classes, %dx%d)",
        n_train,
        len(test_idx),
        spec.num_classes,
        size,
        size,
    )
    return (
        LabeledDataset(stacked[train_idx], labels[train_idx], spec.num_classes, Split.TRAIN),
        LabeledDataset(stacked[test_idx], labels[test_idx], spec.num_classes, Split.TEST),
    )


def save_dataset(dataset: LabeledDataset) -> bytes:
    """Serialize a dataset.

    Raises:
        ValueError: If the dataset is invalid
    """
    problems = dataset.validate()
    if problems:
        raise ValueError("cannot save invalid dataset: " + "; ".join(problems))

    shape = dataset.image_shape
    parts = [
        MAGIC,
        _U32.pack(VERSION),
        _U32.pack(_SPLIT_TAGS[Split(dataset.split)]),
        _U32.pack(len(shape)),
    ]
    parts.extend(_U32.pack(dim) for dim in shape)
    parts.append(_U64.pack(len(dataset)))
    parts.append(_U32.pack(dataset.num_classes))
    parts.append(np.ascontiguousarray(dataset.images, dtype=_F64).tobytes())
    parts.append(np.ascontiguousarray(dataset.labels, dtype=_I64).tobytes())
    return b"".join(parts)


def load_dataset(payload: bytes) -> LabeledDataset:
    """Deserialize a dataset written by :func:`save_dataset`.

    Raises:
        FormatError: If the magic string, version or split tag is wrong
        CorruptionError: If the payload is truncated, has trailing bytes or
            describes an invalid dataset
    """
    reader = PayloadReader(payload, kind="dataset")
    if len(payload) < len(MAGIC) or reader.take(len(MAGIC)) != MAGIC:
        raise FormatError("not a dsrkit dataset (bad magic)")
    version = reader.u32()
    if version != VERSION:
        raise FormatError(f"unsupported dataset version {version}")
    tag = reader.u32()
    splits = {value: key for key, value in _SPLIT_TAGS.items()}
    if tag not in splits:
        raise FormatError(f"unknown split tag {tag}")

    ndim = reader.u32()
    shape = tuple(reader.u32() for _ in range(ndim))
    count = reader.u64()
    num_classes = reader.u32()
    pixels = count * int(np.prod(shape, dtype=np.int64))
    images = np.frombuffer(reader.take(pixels * 8), dtype=_F64).reshape(count, *shape)
    labels = np.frombuffer(reader.take(count * 8), dtype=_I64)
    if reader.offset != len(payload):
        raise CorruptionError(f"{len(payload) - reader.offset} trailing bytes after dataset")

    dataset = LabeledDataset(
        images.astype(np.float64), labels.astype(np.int64), num_classes, splits[tag]
    )
    problems = dataset.validate()
    if problems:
        raise CorruptionError("dataset file describes invalid data: " + "; ".join(problems))
    return dataset


def write_dataset(dataset: LabeledDataset, path: Path) -> Path:
    """Write a dataset file, creating parent directories."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(save_dataset(dataset))
    split = Split(dataset.split).value
    logger.info("Wrote %s split (%d examples) to %s", split, len(dataset), path)
    return path


def read_dataset(path: Path) -> LabeledDataset:
    """Read a dataset file.

    Raises:
        FileNotFoundError: If the file does not exist
    """
    if not path.exists():
        raise FileNotFoundError(f"Dataset not found: {path}")
    return load_dataset(path.read_bytes())
