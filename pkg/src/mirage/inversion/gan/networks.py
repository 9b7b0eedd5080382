"""Generator and two-headed discriminator for the GAN inversion attack."""

from __future__ import annotations

import math
from typing import Final

import torch
import torch.nn.functional as F
from torch import nn

from ...common.exceptions import ConfigError
from ...common.types import PIXEL_MAX

__all__ = ["AuxDiscriminator", "ConditionalGenerator", "GENERATOR_LAYERS"]

GENERATOR_LAYERS: Final = 7
DISCRIMINATOR_BLOCKS: Final = 7
# Blocks that halve the resolution, in the order they are used.
_DOWNSAMPLE_ORDER: Final = (0, 2, 4, 6, 1, 3, 5)


def _doublings(image_size: int) -> int:
    doublings = int(math.log2(image_size)) if image_size > 0 else 0
    if image_size < 4 or 2**doublings != image_size:
        raise ConfigError(
            f"GAN image size must be a power of two ≥ 4, got {image_size}"
        )
    return doublings


class ConditionalGenerator(nn.Module):
    """Seven transposed convolutions from ``[one-hot(class), noise]`` to pixels.

    The first layer expands the 1×1 input to 4×4 and the following ones
    double the resolution until ``image_size``; any remaining layers keep
    the resolution. Hidden layers use batch norm and ReLU; the last one is
    mapped into [0, 255] with a scaled tanh.
    """

    def __init__(
        self,
        *,
        num_classes: int = 10,
        noise_dim: int = 100,
        image_size: int = 32,
        channels: int = 3,
        width: int = 64,
    ) -> None:
        super().__init__()
        self.num_classes = num_classes
        self.noise_dim = noise_dim
        self.image_size = image_size
        self.channels = channels
        self.width = width

        upsampling = _doublings(image_size) - 1
        if upsampling > GENERATOR_LAYERS:
            raise ConfigError(f"GAN image size {image_size} needs too many layers")

        layers: list[nn.Module] = []
        in_ch = num_classes + noise_dim
        for i in range(GENERATOR_LAYERS):
            last = i == GENERATOR_LAYERS - 1
            if i < upsampling:
                out_ch = width * 2 ** (upsampling - 1 - i)
                kernel, stride, padding = (4, 1, 0) if i == 0 else (4, 2, 1)
            else:
                out_ch = width
                kernel, stride, padding = 3, 1, 1
            if last:
                out_ch = channels
            layers.append(
                nn.ConvTranspose2d(in_ch, out_ch, kernel, stride, padding, bias=last)
            )
            if not last:
                layers += [nn.BatchNorm2d(out_ch), nn.ReLU(inplace=True)]
            in_ch = out_ch
        self.net = nn.Sequential(*layers)

    @property
    def image_shape(self) -> tuple[int, int, int]:
        return (self.channels, self.image_size, self.image_size)

    def forward(self, noise: torch.Tensor, labels: torch.Tensor) -> torch.Tensor:
        one_hot = F.one_hot(labels, self.num_classes).to(noise.dtype)
        z = torch.cat([one_hot, noise], dim=1)[:, :, None, None]
        return (torch.tanh(self.net(z)) + 1.0) * (PIXEL_MAX / 2)


class AuxDiscriminator(nn.Module):
    """Seven conv(5×5) / batch norm / LeakyReLU(0.2) / dropout(0.5) blocks.

    Returns a real/fake logit per image and class logits.
    """

    def __init__(
        self,
        *,
        num_classes: int = 10,
        image_size: int = 32,
        channels: int = 3,
        width: int = 32,
    ) -> None:
        super().__init__()
        downsampling = _doublings(image_size) - 2
        if downsampling > DISCRIMINATOR_BLOCKS:
            raise ConfigError(f"GAN image size {image_size} needs too many blocks")
        strided = set(_DOWNSAMPLE_ORDER[:downsampling])
        widths = [width, width, 2 * width, 2 * width, 4 * width, 4 * width, 8 * width]

        blocks: list[nn.Module] = []
        in_ch = channels
        for i, out_ch in enumerate(widths):
            blocks += [
                nn.Conv2d(in_ch, out_ch, 5, stride=2 if i in strided else 1, padding=2),
                nn.BatchNorm2d(out_ch),
                nn.LeakyReLU(0.2, inplace=True),
                nn.Dropout(0.5),
            ]
            in_ch = out_ch
        self.net = nn.Sequential(*blocks)
        flat = in_ch * 4 * 4
        self.realfake = nn.Linear(flat, 1)
        self.classes = nn.Linear(flat, num_classes)

    def forward(self, images: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        x = images / (PIXEL_MAX / 2) - 1.0
        flat = self.net(x).flatten(1)
        return self.realfake(flat).squeeze(1), self.classes(flat)
