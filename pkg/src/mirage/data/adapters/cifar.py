from __future__ import annotations

import logging
import pickle
from pathlib import Path
from typing import Any, Final

import numpy as np

from ...common.exceptions import DatasetIngestionError
from ...common.types import SplitTag
from .base import DatasetSource, RawSplit

__all__ = ["CifarBinarySource", "CifarPickleSource"]

logger = logging.getLogger(__name__)

IMAGE_SHAPE: Final = (3, 32, 32)
RECORD_BYTES: Final = 1 + 3 * 32 * 32
NUM_CLASSES: Final = 10

CORRUPT_PICKLE_ERRORS: Final = (
    pickle.UnpicklingError,
    EOFError,
    KeyError,
    TypeError,
    ValueError,
)

BINARY_FILES: Final = {
    SplitTag.TRAIN: tuple(f"data_batch_{i}.bin" for i in range(1, 6)),
    SplitTag.VALIDATION: ("test_batch.bin",),
}
PICKLE_FILES: Final = {
    SplitTag.TRAIN: tuple(f"data_batch_{i}" for i in range(1, 6)),
    SplitTag.VALIDATION: ("test_batch",),
}


def _require(path: Path) -> Path:
    if not path.is_file():
        raise DatasetIngestionError(path, "file not found")
    return path


def _check_labels(path: Path, labels: np.ndarray) -> None:
    if labels.size and (labels.min() < 0 or labels.max() >= NUM_CLASSES):
        raise DatasetIngestionError(path, "label outside [0, 10)")


class CifarBinarySource(DatasetSource):
    """CIFAR-10 "binary version": fixed 3073-byte records (label + CHW pixels)."""

    def __init__(self, directory: Path) -> None:
        self._directory = Path(directory)

    def _read_file(self, path: Path) -> RawSplit:
        raw = np.fromfile(_require(path), dtype=np.uint8)
        if raw.size == 0 or raw.size % RECORD_BYTES:
            raise DatasetIngestionError(
                path, f"size {raw.size} is not a multiple of {RECORD_BYTES} bytes"
            )
        records = raw.reshape(-1, RECORD_BYTES)
        labels = records[:, 0].astype(np.int64)
        _check_labels(path, labels)
        images = records[:, 1:].reshape(-1, *IMAGE_SHAPE)
        return RawSplit(images=images, labels=labels)

    def read(self, split: SplitTag) -> RawSplit:
        files = BINARY_FILES[split]
        parts = [self._read_file(self._directory / name) for name in files]
        logger.debug("Read %d binary batches from %s", len(parts), self._directory)
        return RawSplit(
            images=np.concatenate([p.images for p in parts]),
            labels=np.concatenate([p.labels for p in parts]),
        )


class CifarPickleSource(DatasetSource):
    """CIFAR-10 "python version": pickled dicts with ``data`` and ``labels``."""

    def __init__(self, directory: Path) -> None:
        self._directory = Path(directory)

    def _read_file(self, path: Path) -> RawSplit:
        try:
            with _require(path).open("rb") as handle:
                batch: dict[Any, Any] = pickle.load(handle, encoding="bytes")
            data = np.asarray(batch[b"data"], dtype=np.uint8)
            labels = np.asarray(batch[b"labels"], dtype=np.int64)
        except DatasetIngestionError:
            raise
        except CORRUPT_PICKLE_ERRORS as exc:
            raise DatasetIngestionError(path, f"corrupt batch ({exc})") from exc

        width = RECORD_BYTES - 1
        if data.ndim != 2 or data.shape[1] != width or len(data) != len(labels):
            raise DatasetIngestionError(path, f"unexpected data shape {data.shape}")
        _check_labels(path, labels)
        return RawSplit(images=data.reshape(-1, *IMAGE_SHAPE), labels=labels)

    def read(self, split: SplitTag) -> RawSplit:
        files = PICKLE_FILES[split]
        parts = [self._read_file(self._directory / name) for name in files]
        return RawSplit(
            images=np.concatenate([p.images for p in parts]),
            labels=np.concatenate([p.labels for p in parts]),
        )
