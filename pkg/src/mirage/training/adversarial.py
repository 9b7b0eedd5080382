from __future__ import annotations

import logging

import torch
import torch.nn.functional as F

from ..classifiers import Classifier, evaluating
from ..common.exceptions import PerturbationBudgetError, PixelRangeError
from ..common.types import PIXEL_MAX, PIXEL_MIN, ImageTensor
from .config import AdvTrainConfig

__all__ = [
    "check_perturbation",
    "generate_adversarial_batch",
    "iterated_sign_attack",
]

logger = logging.getLogger(__name__)


def _per_sample(value: float | torch.Tensor, like: torch.Tensor) -> torch.Tensor:
    tensor = torch.as_tensor(value, dtype=like.dtype, device=like.device)
    if tensor.ndim == 0:
        return tensor
    return tensor.view(-1, *([1] * (like.ndim - 1)))


def iterated_sign_attack(
    model: Classifier,
    images: ImageTensor,
    labels: torch.Tensor,
    *,
    epsilon: float | torch.Tensor,
    step_size: float | torch.Tensor,
    iterations: int,
    random_start: bool = False,
    generator: torch.Generator | None = None,
) -> ImageTensor:
    """Untargeted iterated sign-gradient ascent on cross-entropy.

    Every step is projected back onto the max-norm ball of radius ``epsilon``
    around ``images`` and clipped to [0, 255]. ``epsilon`` and ``step_size``
    may be per-sample tensors.
    """

    origin = images.detach()
    eps = _per_sample(epsilon, origin)
    step = _per_sample(step_size, origin)
    lower = torch.clamp(origin - eps, PIXEL_MIN, PIXEL_MAX)
    upper = torch.clamp(origin + eps, PIXEL_MIN, PIXEL_MAX)

    adv = origin.clone()
    if random_start:
        noise = torch.rand(origin.shape, generator=generator, dtype=origin.dtype)
        adv = adv + (noise.to(origin.device) * 2 - 1) * eps
        adv = torch.minimum(torch.maximum(adv, lower), upper)

    labels = labels.to(model.device)
    with evaluating(model), torch.enable_grad():
        for _ in range(iterations):
            adv.requires_grad_(True)
            loss = F.cross_entropy(model(adv), labels, reduction="sum")
            (grad,) = torch.autograd.grad(loss, adv)
            adv = adv.detach() + step * grad.sign().to(adv.dtype)
            adv = torch.minimum(torch.maximum(adv, lower), upper)
    return adv.detach()


def check_perturbation(
    adv: ImageTensor, images: ImageTensor, epsilon: float, *, tolerance: float = 1e-4
) -> None:
    """Raise unless ``adv`` stays within ``epsilon`` of ``images`` and in [0, 255]."""

    if adv.numel() == 0:
        return
    drift = float((adv - images).abs().max())
    if drift > epsilon + tolerance:
        raise PerturbationBudgetError(drift, epsilon)
    low, high = float(adv.min()), float(adv.max())
    if low < PIXEL_MIN or high > PIXEL_MAX:
        raise PixelRangeError(low, high)


def generate_adversarial_batch(
    model: Classifier,
    images: ImageTensor,
    labels: torch.Tensor,
    cfg: AdvTrainConfig,
    *,
    generator: torch.Generator | None = None,
) -> ImageTensor:
    """Perturb a training batch against the model's current parameters."""

    if cfg.epsilon == 0:
        return images.clone()
    adv = iterated_sign_attack(
        model,
        images,
        labels,
        epsilon=cfg.epsilon,
        step_size=cfg.step_size,
        iterations=cfg.attack_iterations,
        random_start=cfg.random_start,
        generator=generator,
    )
    check_perturbation(adv, images, cfg.epsilon)
    return adv
