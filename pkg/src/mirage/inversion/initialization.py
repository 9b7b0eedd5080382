from __future__ import annotations

import torch

from ..classifiers import Classifier
from ..common.exceptions import ConfigError
from ..common.types import PIXEL_MAX, PIXEL_MIN, ImageTensor, InitMode
from ..data.images import check_pixel_range
from .config import InitSpec, NoiseDistribution

__all__ = ["initial_image", "model_image_shape"]


def model_image_shape(model: Classifier) -> tuple[int, int, int]:
    if model.architecture is None:
        raise ConfigError(f"{model.model_id} has no architecture; pass image_shape")
    size = model.architecture.input_resolution
    return (model.architecture.channels, size, size)


def initial_image(
    spec: InitSpec,
    shape: tuple[int, int, int],
    *,
    seed: int = 0,
    seed_image: ImageTensor | None = None,
) -> ImageTensor:
    """Build X_0: uniform gray, seeded random noise, or a given image."""

    if seed_image is not None or spec.mode is InitMode.SEED_IMAGE:
        if seed_image is None:
            raise ConfigError("init mode seed_image requires a seed image")
        return check_pixel_range(seed_image.detach().to(torch.float32).clone())

    if spec.mode is InitMode.GRAY:
        return torch.full(shape, spec.gray_value, dtype=torch.float32)

    generator = torch.Generator().manual_seed(seed)
    if spec.random_distribution is NoiseDistribution.UNIFORM:
        noise = torch.rand(shape, generator=generator) * 2 - 1
    else:
        noise = torch.randn(shape, generator=generator)
    image = spec.random_mean + spec.random_spread * noise
    return image.clamp(PIXEL_MIN, PIXEL_MAX)
