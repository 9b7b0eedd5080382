from __future__ import annotations

import zipfile
from pathlib import Path

import numpy as np

from ...common.exceptions import DatasetIngestionError
from ...common.types import SplitTag
from .base import DatasetSource, RawSplit

__all__ = ["NpzCacheSource", "write_cache_split"]


def cache_file(directory: Path, split: SplitTag) -> Path:
    return Path(directory) / f"{split.value}.npz"


def write_cache_split(directory: Path, split: SplitTag, raw: RawSplit) -> Path:
    """Write one split in the cache layout: ``<split>.npz`` with images + labels."""

    path = cache_file(directory, split)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savez_compressed(path, images=raw.images, labels=raw.labels)
    return path


class NpzCacheSource(DatasetSource):
    """The toolkit's cache layout: ``train.npz`` / ``validation.npz``.

    Each archive holds ``images`` as uint8 ``(N, C, H, W)`` and ``labels`` as
    integers.
    """

    def __init__(self, directory: Path) -> None:
        self._directory = Path(directory)

    def read(self, split: SplitTag) -> RawSplit:
        path = cache_file(self._directory, split)
        if not path.is_file():
            raise DatasetIngestionError(path, "file not found")
        try:
            with np.load(path) as archive:
                images = np.asarray(archive["images"], dtype=np.uint8)
                labels = np.asarray(archive["labels"], dtype=np.int64)
        except (KeyError, ValueError, OSError, zipfile.BadZipFile) as exc:
            raise DatasetIngestionError(path, f"corrupt cache ({exc})") from exc

        if images.ndim != 4 or len(images) != len(labels):
            raise DatasetIngestionError(path, f"unexpected image shape {images.shape}")
        return RawSplit(images=images, labels=labels)
