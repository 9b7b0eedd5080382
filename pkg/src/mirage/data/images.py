"""Pixel-domain helpers: range checks, normalization, resampling and PNG I/O."""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F
from PIL import Image

from ..common.atomic import atomic_write_bytes
from ..common.exceptions import PixelRangeError
from ..common.types import PIXEL_MAX, PIXEL_MIN, ImageTensor
from .config import NormalizationSpec

__all__ = [
    "check_pixel_range",
    "encode_png",
    "from_model_space",
    "image_filename",
    "load_image",
    "resize_images",
    "save_image",
    "to_model_space",
]


def check_pixel_range(img: ImageTensor) -> ImageTensor:
    """Raise ``PixelRangeError`` unless every element lies in [0, 255]."""

    if img.numel() == 0:
        return img
    low, high = float(img.min()), float(img.max())
    if low < PIXEL_MIN or high > PIXEL_MAX or not np.isfinite([low, high]).all():
        raise PixelRangeError(low, high)
    return img


def _channel_view(values: tuple[float, ...], like: torch.Tensor) -> torch.Tensor:
    shape = (-1, 1, 1) if like.ndim == 3 else (1, -1, 1, 1)
    return torch.tensor(values, dtype=like.dtype, device=like.device).view(shape)


def to_model_space(img: ImageTensor, norm: NormalizationSpec) -> torch.Tensor:
    return (img - _channel_view(norm.mean, img)) / _channel_view(norm.std, img)


def from_model_space(values: torch.Tensor, norm: NormalizationSpec) -> ImageTensor:
    return values * _channel_view(norm.std, values) + _channel_view(norm.mean, values)


def resize_images(
    img: ImageTensor, size: int | tuple[int, int], *, antialias: bool = False
) -> ImageTensor:
    """Bilinearly resample ``(C, H, W)`` or ``(N, C, H, W)`` images to ``size``."""

    target = (size, size) if isinstance(size, int) else size
    if tuple(img.shape[-2:]) == tuple(target):
        return img
    batch = img if img.ndim == 4 else img.unsqueeze(0)
    resized = F.interpolate(
        batch, size=target, mode="bilinear", align_corners=False, antialias=antialias
    )
    resized = resized.clamp(PIXEL_MIN, PIXEL_MAX)
    return resized if img.ndim == 4 else resized.squeeze(0)


def image_filename(model_id: str, attack_id: str, class_id: int, seed: int) -> str:
    return f"{model_id}__{attack_id}__c{class_id}__s{seed}.png"


def encode_png(img: ImageTensor) -> bytes:
    """Encode a ``(C, H, W)`` pixel image as lossless PNG bytes."""

    check_pixel_range(img)
    pixels = img.detach().cpu().round().to(torch.uint8)
    array = pixels.permute(1, 2, 0).numpy()
    if array.shape[2] == 1:
        array = array[:, :, 0]
    buffer = io.BytesIO()
    Image.fromarray(array).save(buffer, format="PNG")
    return buffer.getvalue()


def save_image(img: ImageTensor, path: Path | str) -> Path:
    return atomic_write_bytes(path, encode_png(img))


def load_image(source: Path | str | bytes) -> ImageTensor:
    """Read a PNG file (or PNG bytes) into a float32 ``(C, H, W)`` pixel tensor."""

    handle = io.BytesIO(source) if isinstance(source, bytes) else source
    with Image.open(handle) as image:
        array = np.asarray(image)
    if array.ndim == 2:
        array = array[:, :, None]
    return torch.from_numpy(array.copy()).permute(2, 0, 1).to(torch.float32)
