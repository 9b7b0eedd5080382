"""Dataset ingestion, shadow designation and pixel-domain utilities."""

from .config import CIFAR10_NORMALIZATION, DatasetConfig, NormalizationSpec
from .images import (
    check_pixel_range,
    encode_png,
    from_model_space,
    image_filename,
    load_image,
    resize_images,
    save_image,
    to_model_space,
)
from .models import LabeledDataset
from .service import ensure_disjoint, fetch_cifar10, load_dataset, load_splits

__all__ = [
    "CIFAR10_NORMALIZATION",
    "DatasetConfig",
    "LabeledDataset",
    "NormalizationSpec",
    "check_pixel_range",
    "encode_png",
    "ensure_disjoint",
    "fetch_cifar10",
    "from_model_space",
    "image_filename",
    "load_dataset",
    "load_image",
    "load_splits",
    "resize_images",
    "save_image",
    "to_model_space",
]
