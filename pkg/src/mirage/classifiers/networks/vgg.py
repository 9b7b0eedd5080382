from __future__ import annotations

from typing import Final

import torch
from torch import nn

from .base import Backbone

__all__ = ["VGG16Style"]

# Configuration "D" of the VGG family; "M" is a 2x2 max-pool.
VGG16_LAYERS: Final[tuple[int | str, ...]] = (
    64, 64, "M",
    128, 128, "M",
    256, 256, 256, "M",
    512, 512, 512, "M",
    512, 512, 512, "M",
)  # fmt: skip


class VGG16Style(Backbone):
    """VGG16 convolutional stack with a two-layer head sized for 32x32 input."""

    def __init__(
        self,
        num_classes: int,
        *,
        in_channels: int = 3,
        hidden_units: int = 512,
        dropout: float = 0.5,
    ) -> None:
        super().__init__()
        layers: list[nn.Module] = []
        channels = in_channels
        for spec in VGG16_LAYERS:
            if spec == "M":
                layers.append(nn.MaxPool2d(kernel_size=2, stride=2))
                continue
            assert isinstance(spec, int)
            layers += [
                nn.Conv2d(channels, spec, kernel_size=3, padding=1),
                nn.BatchNorm2d(spec),
                nn.ReLU(inplace=True),
            ]
            channels = spec
        self.conv = nn.Sequential(*layers)
        self.pool = nn.AdaptiveAvgPool2d(1)
        self.feature_dim = channels
        self.head = nn.Sequential(
            nn.Linear(channels, hidden_units),
            nn.ReLU(inplace=True),
            nn.Dropout(dropout),
            nn.Linear(hidden_units, num_classes),
        )

    def features(self, x: torch.Tensor) -> torch.Tensor:
        return torch.flatten(self.pool(self.conv(x)), 1)
