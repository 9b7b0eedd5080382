"""Shared fixtures: tiny smooth networks, linear models and synthetic datasets."""

from collections.abc import Callable

import pytest
import torch
from torch import nn

from mirage.classifiers import Classifier
from mirage.classifiers.config import ClassifierMetadata
from mirage.classifiers.networks import Backbone
from mirage.common.types import DatasetRole, SplitTag
from mirage.data import LabeledDataset, NormalizationSpec


class TinyConvBackbone(Backbone):
    """Two tanh convolutions and a linear head; smooth everywhere."""

    def __init__(self, channels: int = 3, num_classes: int = 10, hidden: int = 6):
        super().__init__()
        self.conv1 = nn.Conv2d(channels, hidden, 3, padding=1)
        self.conv2 = nn.Conv2d(hidden, hidden, 3, padding=1)
        self.pool = nn.AdaptiveAvgPool2d(1)
        self.feature_dim = hidden
        self.head = nn.Linear(hidden, num_classes)

    def features(self, x: torch.Tensor) -> torch.Tensor:
        out = torch.tanh(self.conv2(torch.tanh(self.conv1(x))))
        return torch.flatten(self.pool(out), 1)


class LinearBackbone(Backbone):
    """Logits are an affine function of the flattened model-space input."""

    def __init__(self, weight: torch.Tensor, bias: torch.Tensor):
        super().__init__()
        num_classes, dim = weight.shape
        self.feature_dim = dim
        self.head = nn.Linear(dim, num_classes)
        with torch.no_grad():
            self.head.weight.copy_(weight)
            self.head.bias.copy_(bias)

    def features(self, x: torch.Tensor) -> torch.Tensor:
        return x.flatten(1)


def wrap(
    backbone: Backbone,
    *,
    num_classes: int = 10,
    model_id: str = "tiny",
    dtype: torch.dtype = torch.float64,
) -> Classifier:
    model = Classifier(
        backbone,
        NormalizationSpec(),
        num_classes=num_classes,
        metadata=ClassifierMetadata(model_id=model_id),
    )
    return model.to(dtype).eval()


@pytest.fixture
def make_tiny_model() -> Callable[..., Classifier]:
    def factory(
        seed: int = 0,
        *,
        channels: int = 3,
        num_classes: int = 10,
        model_id: str = "tiny",
        dtype: torch.dtype = torch.float64,
    ) -> Classifier:
        torch.manual_seed(seed)
        backbone = TinyConvBackbone(channels, num_classes)
        return wrap(backbone, num_classes=num_classes, model_id=model_id, dtype=dtype)

    return factory


@pytest.fixture
def tiny_model(make_tiny_model: Callable[..., Classifier]) -> Classifier:
    return make_tiny_model()


@pytest.fixture
def make_linear_model() -> Callable[..., Classifier]:
    """Linear classifier with the given pixel-space weight per class.

    With the default normalization (mean = std = 127.5) the logit of class
    k is ``w_k · (x - 127.5) / 127.5 + b_k``.
    """

    def factory(
        weight: torch.Tensor, bias: torch.Tensor, *, model_id: str = "linear"
    ) -> Classifier:
        weight = weight.to(torch.float64)
        return wrap(
            LinearBackbone(weight, bias.to(torch.float64)),
            num_classes=weight.shape[0],
            model_id=model_id,
        )

    return factory


@pytest.fixture
def make_dataset() -> Callable[..., LabeledDataset]:
    def factory(
        n: int = 20,
        *,
        size: int = 8,
        channels: int = 3,
        num_classes: int = 10,
        seed: int = 0,
        split: SplitTag = SplitTag.TRAIN,
    ) -> LabeledDataset:
        generator = torch.Generator().manual_seed(seed)
        images = torch.randint(
            0, 256, (n, channels, size, size), generator=generator, dtype=torch.uint8
        )
        return LabeledDataset(
            images=images,
            labels=torch.arange(n) % num_classes,
            split=split,
            role=(
                DatasetRole.SHADOW
                if split is SplitTag.VALIDATION
                else DatasetRole.TARGET
            ),
            source_indices=torch.arange(n),
            num_classes=num_classes,
        )

    return factory
