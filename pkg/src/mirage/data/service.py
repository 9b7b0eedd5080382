from __future__ import annotations

import logging
import os
from collections.abc import Callable
from pathlib import Path
from typing import Final

import numpy as np
import torch

from ..common.exceptions import ConfigError, DatasetIngestionError
from ..common.types import DatasetRole, SplitTag
from .adapters import (
    CifarBinarySource,
    CifarPickleSource,
    DatasetSource,
    NpzCacheSource,
    RawSplit,
    write_cache_split,
)
from .adapters.cache import cache_file
from .config import DatasetConfig
from .images import resize_images
from .models import LabeledDataset

__all__ = [
    "DATA_DIR_ENV",
    "ensure_disjoint",
    "fetch_cifar10",
    "load_dataset",
    "load_splits",
    "resolve_data_dir",
    "resolve_source",
]

logger = logging.getLogger(__name__)

DATA_DIR_ENV: Final = "MIRAGE_DATA_DIR"


def resolve_data_dir(path: Path | str | None) -> Path:
    """Return ``path`` or fall back to ``$MIRAGE_DATA_DIR``."""

    if path is not None:
        return Path(path)
    if env := os.environ.get(DATA_DIR_ENV):
        return Path(env)
    raise ConfigError(f"No dataset path given and ${DATA_DIR_ENV} is not set")


def resolve_source(directory: Path) -> DatasetSource:
    """Pick a reader for whichever supported layout ``directory`` holds."""

    directory = Path(directory)
    if not directory.is_dir():
        raise DatasetIngestionError(directory, "directory not found")

    candidates: list[tuple[Path, Callable[[Path], DatasetSource]]] = [
        (directory / "cifar-10-batches-bin", CifarBinarySource),
        (directory / "cifar-10-batches-py", CifarPickleSource),
    ]
    for nested, source_cls in candidates:
        if nested.is_dir():
            return source_cls(nested)
    if cache_file(directory, SplitTag.TRAIN).is_file():
        return NpzCacheSource(directory)
    if (directory / "data_batch_1.bin").is_file():
        return CifarBinarySource(directory)
    if (directory / "data_batch_1").is_file():
        return CifarPickleSource(directory)
    raise DatasetIngestionError(
        directory / "data_batch_1.bin", "no CIFAR binary, python or cache layout found"
    )


def _subset_indices(total: int, subset_size: int | None, seed: int) -> torch.Tensor:
    if subset_size is None or subset_size >= total:
        return torch.arange(total)
    generator = torch.Generator().manual_seed(seed)
    chosen = torch.randperm(total, generator=generator)[:subset_size]
    return torch.sort(chosen).values


def _to_dataset(
    raw: RawSplit,
    split: SplitTag,
    *,
    subset_size: int | None,
    seed: int,
    downscale: int | None,
    num_classes: int,
) -> LabeledDataset:
    indices = _subset_indices(len(raw.labels), subset_size, seed)
    images = torch.from_numpy(np.ascontiguousarray(raw.images))[indices]
    if downscale is not None and images.shape[-1] != downscale:
        images = (
            resize_images(images.to(torch.float32), downscale, antialias=True)
            .round()
            .to(torch.uint8)
        )
    return LabeledDataset(
        images=images,
        labels=torch.from_numpy(raw.labels)[indices].to(torch.long),
        split=split,
        role=DatasetRole.SHADOW if split is SplitTag.VALIDATION else DatasetRole.TARGET,
        source_indices=indices.to(torch.long),
        num_classes=num_classes,
    )


def load_dataset(
    source_path: Path | str | None,
    split: SplitTag | str,
    *,
    subset_size: int | None = None,
    seed: int = 0,
    downscale: int | None = None,
    num_classes: int = 10,
    source: DatasetSource | None = None,
) -> LabeledDataset:
    """Load one split, optionally subsetted and resized for desk-scale runs.

    The validation split doubles as shadow data, so it is returned with the
    shadow role already set.
    """

    split = SplitTag(split)
    reader = source or resolve_source(resolve_data_dir(source_path))
    dataset = _to_dataset(
        reader.read(split),
        split,
        subset_size=subset_size,
        seed=seed,
        downscale=downscale,
        num_classes=num_classes,
    )
    logger.info(
        "Loaded %d %s images of shape %s",
        len(dataset),
        split.value,
        dataset.image_shape,
    )
    return dataset


def load_splits(
    config: DatasetConfig, *, source: DatasetSource | None = None
) -> tuple[LabeledDataset, LabeledDataset]:
    """Load the target training split and the shadow (validation) split."""

    reader = source or resolve_source(resolve_data_dir(config.source_path))
    train, shadow = (
        load_dataset(
            None,
            split,
            subset_size=subset_size,
            seed=config.seed,
            downscale=config.downscale,
            num_classes=config.num_classes,
            source=reader,
        )
        for split, subset_size in (
            (SplitTag.TRAIN, config.subset_size),
            (SplitTag.VALIDATION, config.validation_subset_size),
        )
    )
    ensure_disjoint(train, shadow)
    return train, shadow


def ensure_disjoint(target: LabeledDataset, shadow: LabeledDataset) -> None:
    """Check shadow ∩ target = ∅ by (split, source index) bookkeeping."""

    if target.split is not shadow.split:
        return
    overlap = np.intersect1d(
        target.source_indices.numpy(), shadow.source_indices.numpy()
    )
    if overlap.size:
        raise ConfigError(
            f"Shadow data overlaps the target training split at {overlap.size} indices"
        )


def fetch_cifar10(root: Path | str) -> Path:
    """Download CIFAR-10 with torchvision and mirror it into the cache layout."""

    from torchvision.datasets import CIFAR10

    root = Path(root)
    for split, train in ((SplitTag.TRAIN, True), (SplitTag.VALIDATION, False)):
        dataset = CIFAR10(root=str(root), train=train, download=True)
        raw = RawSplit(
            images=np.ascontiguousarray(dataset.data.transpose(0, 3, 1, 2)),
            labels=np.asarray(dataset.targets, dtype=np.int64),
        )
        path = write_cache_split(root, split, raw)
        logger.info("Cached %s split at %s", split.value, path)
    return root
