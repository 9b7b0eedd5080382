import pytest
import torch

from mirage.common.types import SplitTag
from mirage.data import LabeledDataset


@pytest.fixture
def make_constant_dataset():
    """Images filled with one value each, on a 3x4x4 grid."""

    def factory(values: list[int], labels: list[int], *, num_classes: int = 2):
        images = torch.stack(
            [torch.full((3, 4, 4), v, dtype=torch.uint8) for v in values]
        )
        return LabeledDataset(
            images=images,
            labels=torch.tensor(labels),
            split=SplitTag.TRAIN,
            source_indices=torch.arange(len(values)) + 100,
            num_classes=num_classes,
        )

    return factory


@pytest.fixture
def balanced_direction() -> torch.Tensor:
    """±1 per pixel with as many + as -, so it sums to zero."""

    return torch.tensor([1.0, -1.0] * 24)
