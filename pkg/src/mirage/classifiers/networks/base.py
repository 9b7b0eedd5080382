from __future__ import annotations

import torch
from torch import nn

__all__ = ["Backbone"]


class Backbone(nn.Module):
    """A classifier split at the final convolutional layer.

    ``features`` maps model-space inputs to a spatially pooled vector of
    length ``feature_dim``; ``head`` maps that vector to logits.
    """

    feature_dim: int
    head: nn.Module

    def features(self, x: torch.Tensor) -> torch.Tensor:
        raise NotImplementedError

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.head(self.features(x))
