from enum import Enum
from typing import Final

import torch

__all__: Final = (
    "ArchitectureFamily",
    "AttackKind",
    "DatasetRole",
    "ImageTensor",
    "InitMode",
    "PIXEL_MAX",
    "PIXEL_MIN",
    "SplitTag",
    "TrainingRegime",
)

PIXEL_MIN: Final = 0.0
PIXEL_MAX: Final = 255.0

# Pixel-domain image(s): (C, H, W) or (N, C, H, W), values in [0, 255].
type ImageTensor = torch.Tensor


class SplitTag(str, Enum):
    """Which published split a dataset was read from."""

    TRAIN = "train"
    VALIDATION = "validation"


class DatasetRole(str, Enum):
    """What a dataset is used for in an experiment."""

    TARGET = "target"
    SHADOW = "shadow"


class TrainingRegime(str, Enum):
    """Traditionally trained (TTM) or adversarially trained (ATM)."""

    TTM = "TTM"
    ATM = "ATM"


class ArchitectureFamily(str, Enum):
    VGG16_STYLE = "vgg16_style"
    WIDE_RESNET = "wide_resnet"


class AttackKind(str, Enum):
    """Model-inversion attack families."""

    PGD = "pgd"
    DEEPDREAM = "deepdream"
    GAN = "gan"


class InitMode(str, Enum):
    """Starting image of an input-space inversion."""

    GRAY = "gray"
    RANDOM = "random"
    SEED_IMAGE = "seed_image"
