"""Model zoo behind one differentiable-classifier abstraction."""

from .builders import build_model
from .checkpoints import encode_classifier, load_checkpoint, save_checkpoint
from .classifier import Classifier, evaluating
from .config import ArchitectureConfig, ClassifierMetadata

__all__ = [
    "ArchitectureConfig",
    "Classifier",
    "ClassifierMetadata",
    "build_model",
    "encode_classifier",
    "evaluating",
    "load_checkpoint",
    "save_checkpoint",
]
