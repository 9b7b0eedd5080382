from __future__ import annotations

from collections.abc import Iterator
from contextlib import contextmanager

import torch
from torch import nn

from ..common.exceptions import InvalidClassError
from ..common.types import ImageTensor
from ..data.config import NormalizationSpec
from ..data.images import to_model_space
from .config import ArchitectureConfig, ClassifierMetadata
from .networks import Backbone

__all__ = ["Classifier", "evaluating"]


@contextmanager
def evaluating(module: nn.Module) -> Iterator[nn.Module]:
    """Put ``module`` in evaluation mode and restore its previous mode after."""

    was_training = module.training
    module.eval()
    try:
        yield module
    finally:
        module.train(was_training)


def _as_batch(img: ImageTensor) -> tuple[torch.Tensor, bool]:
    if img.ndim == 3:
        return img.unsqueeze(0), True
    return img, False


class Classifier(nn.Module):
    """Differentiable classifier taking pixel-domain images.

    Normalization into model space is part of the forward pass, so every
    gradient this class reports is with respect to pixel counts. Query
    methods run in evaluation mode and accept a single ``(C, H, W)`` image
    or an ``(N, C, H, W)`` batch.
    """

    def __init__(
        self,
        backbone: Backbone,
        normalization: NormalizationSpec,
        *,
        num_classes: int,
        architecture: ArchitectureConfig | None = None,
        metadata: ClassifierMetadata | None = None,
    ) -> None:
        super().__init__()
        self.backbone = backbone
        self.normalization = normalization
        self.num_classes = num_classes
        self.architecture = architecture
        self.metadata = metadata or ClassifierMetadata()

    @property
    def model_id(self) -> str:
        return self.metadata.model_id

    @property
    def feature_dim(self) -> int:
        return self.backbone.feature_dim

    @property
    def dtype(self) -> torch.dtype:
        return next(self.parameters()).dtype

    @property
    def device(self) -> torch.device:
        return next(self.parameters()).device

    @property
    def final_layer(self) -> nn.Linear:
        """The last fully connected layer of the head."""
        layers = [m for m in self.backbone.head.modules() if isinstance(m, nn.Linear)]
        return layers[-1]

    def _prepare(self, images: torch.Tensor) -> torch.Tensor:
        pixels = images.to(device=self.device, dtype=self.dtype)
        return to_model_space(pixels, self.normalization)

    def forward(self, images: ImageTensor) -> torch.Tensor:
        """Logits for an ``(N, C, H, W)`` pixel batch in the current mode."""
        return self.backbone(self._prepare(images))

    def _check_class(self, class_id: int) -> None:
        if not 0 <= class_id < self.num_classes:
            raise InvalidClassError(class_id, self.num_classes)

    @torch.no_grad()
    def forward_logits(self, img: ImageTensor) -> torch.Tensor:
        batch, single = _as_batch(img)
        with evaluating(self):
            logits = self(batch)
        return logits[0] if single else logits

    def predict(self, img: ImageTensor) -> torch.Tensor:
        return self.forward_logits(img).argmax(dim=-1)

    def class_activation(self, img: ImageTensor, class_id: int) -> float:
        """Pre-softmax logit of ``class_id`` for a single image."""
        self._check_class(class_id)
        return float(self.forward_logits(img)[..., class_id].reshape(-1)[0])

    def class_activations(self, images: ImageTensor, class_id: int) -> torch.Tensor:
        self._check_class(class_id)
        batch, _ = _as_batch(images)
        return self.forward_logits(batch)[:, class_id]

    def logits_and_gradient(
        self, img: ImageTensor, class_id: int
    ) -> tuple[torch.Tensor, torch.Tensor]:
        """Logits and d(logit[class_id])/d(pixels), from one forward/backward pass."""

        self._check_class(class_id)
        batch, single = _as_batch(img)
        pixels = batch.detach().to(device=self.device, dtype=self.dtype)
        pixels.requires_grad_(True)
        with evaluating(self), torch.enable_grad():
            logits = self(pixels)
            (grad,) = torch.autograd.grad(logits[:, class_id].sum(), pixels)
        logits = logits.detach().to(img.device)
        grad = grad.to(device=img.device, dtype=img.dtype)
        return (logits[0], grad[0]) if single else (logits, grad)

    def input_gradient(self, img: ImageTensor, class_id: int) -> torch.Tensor:
        return self.logits_and_gradient(img, class_id)[1]

    @torch.no_grad()
    def penultimate_features(self, img: ImageTensor) -> torch.Tensor:
        """Globally pooled output of the final convolutional layer."""
        batch, single = _as_batch(img)
        with evaluating(self):
            feats = self.backbone.features(self._prepare(batch))
        return feats[0] if single else feats

    @contextmanager
    def frozen(self) -> Iterator[Classifier]:
        """Evaluation mode with parameter gradients disabled, restored on exit."""

        flags = [p.requires_grad for p in self.parameters()]
        self.requires_grad_(False)
        try:
            with evaluating(self):
                yield self
        finally:
            for param, flag in zip(self.parameters(), flags, strict=True):
                param.requires_grad_(flag)
