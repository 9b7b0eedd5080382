from __future__ import annotations

import logging
from pathlib import Path
from typing import Final

from ..common.atomic import atomic_write_bytes
from ..common.checkpoints import encode_checkpoint, read_checkpoint
from ..common.exceptions import ConfigError
from ..data.config import NormalizationSpec
from .builders import build_backbone
from .classifier import Classifier
from .config import ArchitectureConfig, ClassifierMetadata

__all__ = ["encode_classifier", "load_checkpoint", "save_checkpoint"]

logger = logging.getLogger(__name__)

CLASSIFIER_KIND: Final = "classifier"


def encode_classifier(model: Classifier) -> bytes:
    """Weights plus architecture, normalization, regime, seed and epochs."""

    if model.architecture is None:
        raise ConfigError(
            "Only classifiers built from an ArchitectureConfig can be checkpointed"
        )
    header = {
        "architecture": model.architecture.model_dump(mode="json"),
        "normalization": model.normalization.model_dump(mode="json"),
        "metadata": model.metadata.model_dump(mode="json"),
    }
    return encode_checkpoint(CLASSIFIER_KIND, header, model.state_dict())


def save_checkpoint(model: Classifier, path: Path | str) -> Path:
    path = atomic_write_bytes(path, encode_classifier(model))
    logger.info(
        "Saved %s (epoch %d) to %s", model.model_id, model.metadata.epochs, path
    )
    return path


def load_checkpoint(source: Path | str | bytes) -> Classifier:
    """Rebuild a classifier from a checkpoint file or its encoded bytes."""

    header, state = read_checkpoint(source, CLASSIFIER_KIND)
    architecture = ArchitectureConfig.model_validate(header["architecture"])
    model = Classifier(
        build_backbone(architecture),
        NormalizationSpec.model_validate(header["normalization"]),
        num_classes=architecture.num_classes,
        architecture=architecture,
        metadata=ClassifierMetadata.model_validate(header["metadata"]),
    )
    model.load_state_dict(state)
    model.eval()
    return model
