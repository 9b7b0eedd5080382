"""Builder functions for the classifier zoo."""

from __future__ import annotations

import logging

import torch

from ..common.types import ArchitectureFamily, TrainingRegime
from ..data.config import CIFAR10_NORMALIZATION, NormalizationSpec
from .classifier import Classifier
from .config import ArchitectureConfig, ClassifierMetadata
from .networks import Backbone, VGG16Style, WideResNet

__all__ = ["build_backbone", "build_model", "count_parameters"]

logger = logging.getLogger(__name__)


def build_backbone(cfg: ArchitectureConfig) -> Backbone:
    if cfg.family is ArchitectureFamily.WIDE_RESNET:
        return WideResNet(
            cfg.depth,
            cfg.width,
            cfg.num_classes,
            in_channels=cfg.channels,
            dropout=cfg.dropout,
        )
    return VGG16Style(
        cfg.num_classes,
        in_channels=cfg.channels,
        hidden_units=cfg.vgg_hidden_units,
        dropout=cfg.dropout,
    )


def count_parameters(model: torch.nn.Module) -> int:
    return sum(p.numel() for p in model.parameters())


def build_model(
    cfg: ArchitectureConfig,
    seed: int = 0,
    *,
    normalization: NormalizationSpec = CIFAR10_NORMALIZATION,
    model_id: str | None = None,
    regime: TrainingRegime = TrainingRegime.TTM,
) -> Classifier:
    """Build a randomly initialized classifier, deterministic under ``seed``."""

    torch.manual_seed(seed)
    model = Classifier(
        build_backbone(cfg),
        normalization,
        num_classes=cfg.num_classes,
        architecture=cfg,
        metadata=ClassifierMetadata(
            model_id=model_id or cfg.label, regime=regime, epochs=0, seed=seed
        ),
    )
    logger.info(
        "Built %s (%s) with %d parameters",
        model.model_id,
        cfg.label,
        count_parameters(model),
    )
    return model
