"""Multi-scale inversion: normalized-gradient ascent from coarse to fine octaves.

Each octave image is optimized at its own resolution; the classifier sees
it bilinearly upsampled to the base resolution, so coarse octaves only
carry low-frequency structure.
"""

from __future__ import annotations

import logging
import math

import torch

from ..classifiers import Classifier, evaluating
from ..common.exceptions import ConfigError, InvalidClassError
from ..common.types import PIXEL_MAX, PIXEL_MIN, AttackKind, ImageTensor
from ..data.images import check_pixel_range, resize_images
from .config import DreamConfig
from .initialization import initial_image, model_image_shape
from .models import InversionResult, TrajectoryPoint

__all__ = [
    "MIN_OCTAVE_SIZE",
    "build_octave_pyramid",
    "calibrate_tv_weight",
    "dream_step",
    "invert_class_multiscale",
    "octave_sizes",
    "total_variation",
]

logger = logging.getLogger(__name__)

MIN_OCTAVE_SIZE = 4
TV_EPS = 1e-8


def octave_sizes(
    base: tuple[int, int], octaves: int, octave_scale: float
) -> list[tuple[int, int]]:
    """Sizes low → high: ``floor(base / scale**k)`` for k = octaves-1 .. 0."""

    sizes = []
    for k in reversed(range(octaves)):
        size = tuple(math.floor(side / octave_scale**k) for side in base)
        if min(size) < MIN_OCTAVE_SIZE:
            raise ConfigError(
                f"{octaves} octaves at scale {octave_scale} shrink {base} to {size}, "
                f"below the {MIN_OCTAVE_SIZE}-pixel floor"
            )
        sizes.append((size[0], size[1]))
    return sizes


def build_octave_pyramid(
    img: ImageTensor, octaves: int, octave_scale: float
) -> list[ImageTensor]:
    height, width = img.shape[-2:]
    sizes = octave_sizes((height, width), octaves, octave_scale)
    return [check_pixel_range(resize_images(img, size)) for size in sizes]


def total_variation(img: torch.Tensor) -> torch.Tensor:
    """Isotropic total variation summed over channels (and batch)."""

    dh = img[..., 1:, :-1] - img[..., :-1, :-1]
    dw = img[..., :-1, 1:] - img[..., :-1, :-1]
    return torch.sqrt(dh**2 + dw**2 + TV_EPS).sum()


def _objective_gradient(
    x: ImageTensor,
    model: Classifier,
    class_id: int,
    tv_weight: float,
    model_size: tuple[int, int] | None,
) -> tuple[torch.Tensor, torch.Tensor]:
    pixels = x.detach().to(device=model.device, dtype=model.dtype)
    pixels.requires_grad_(True)
    with evaluating(model), torch.enable_grad():
        seen = resize_images(pixels, model_size) if model_size else pixels
        logits = model(seen.unsqueeze(0))[0]
        objective = logits[class_id]
        if tv_weight:
            objective = objective - tv_weight * total_variation(pixels)
        (grad,) = torch.autograd.grad(objective, pixels)
    return logits.detach().to(x.device), grad.to(device=x.device, dtype=x.dtype)


def _ascend(
    x: ImageTensor,
    model: Classifier,
    class_id: int,
    lr: float,
    tv_weight: float,
    model_size: tuple[int, int] | None,
) -> tuple[ImageTensor, torch.Tensor]:
    logits, grad = _objective_gradient(x, model, class_id, tv_weight, model_size)
    scale = grad.abs().mean()
    if scale == 0:
        # Nothing to normalize by; the step is skipped.
        return x, logits
    stepped = torch.clamp(x + lr * grad / scale, PIXEL_MIN, PIXEL_MAX)
    return check_pixel_range(stepped), logits


def dream_step(
    x: ImageTensor,
    model: Classifier,
    class_id: int,
    lr: float,
    tv_weight: float,
    *,
    model_size: tuple[int, int] | None = None,
) -> ImageTensor:
    """X' = clip(X + lr * G / mean|G|), G = ∇[activation - λ_tv · TV(X)].

    A zero gradient leaves X unchanged. ``model_size`` upsamples X before
    the classifier sees it.
    """

    return _ascend(x, model, class_id, lr, tv_weight, model_size)[0]


def calibrate_tv_weight(model: Classifier, x: ImageTensor, class_id: int) -> float:
    """λ_tv matching the class-gradient magnitude at ``x``.

    Per-pixel TV gradients are of order one once an image has any texture,
    so this puts both loss terms on a comparable scale.
    """

    _, grad = _objective_gradient(x, model, class_id, 0.0, None)
    return float(grad.abs().mean())


def invert_class_multiscale(
    model: Classifier,
    cfg: DreamConfig,
    *,
    image_shape: tuple[int, int, int] | None = None,
    seed_image: ImageTensor | None = None,
    attack_id: str = AttackKind.DEEPDREAM.value,
) -> InversionResult:
    """Optimize coarse-to-fine through every octave, ``outer_iterations`` times.

    Trajectory points record the target activation of the image each step
    started from.
    """

    shape = tuple(seed_image.shape) if seed_image is not None else None
    channels, height, width = shape or image_shape or model_image_shape(model)
    base = (height, width)
    sizes = octave_sizes(base, cfg.octaves, cfg.octave_scale)
    x = initial_image(
        cfg.init, (channels, height, width), seed=cfg.seed, seed_image=seed_image
    )
    start = x.clone()
    target = cfg.target_class
    if not 0 <= target < model.num_classes:
        raise InvalidClassError(target, model.num_classes)

    tv_weight = cfg.tv_weight
    if tv_weight is None:
        tv_weight = calibrate_tv_weight(model, x, target)
        logger.info("Calibrated tv weight for %s: %.4g", model.model_id, tv_weight)

    initial_logits = model.forward_logits(x)
    trajectory: list[TrajectoryPoint] = []
    octave_images: list[ImageTensor] = []
    iterations_to_target: int | None = None
    step = 0
    for _ in range(cfg.outer_iterations):
        level = resize_images(x, sizes[0])
        for k, size in enumerate(sizes):
            if k:
                level = check_pixel_range(resize_images(level, size))
            model_size = None if size == base else base
            for _ in range(cfg.steps_per_octave):
                level, logits = _ascend(
                    level, model, target, cfg.lr, tv_weight, model_size
                )
                if iterations_to_target is None and int(logits.argmax()) == target:
                    iterations_to_target = step
                if cfg.record_trajectory:
                    trajectory.append(
                        TrajectoryPoint(
                            iteration=step, activation=float(logits[target])
                        )
                    )
                step += 1
            if cfg.keep_octave_images:
                octave_images.append(level.detach().clone())
        x = level

    final_logits = model.forward_logits(x)
    if iterations_to_target is None and int(final_logits.argmax()) == target:
        iterations_to_target = step

    return InversionResult(
        attack_id=attack_id,
        attack_kind=AttackKind.DEEPDREAM,
        model_id=model.model_id,
        target_class=target,
        seed=cfg.seed,
        lr=cfg.lr,
        iterations_run=step,
        iterations_to_target=iterations_to_target,
        initial_activation=float(initial_logits[target]),
        final_activation=float(final_logits[target]),
        displacement_l2=(
            float(torch.linalg.vector_norm((x - start).double()))
            if seed_image is not None
            else None
        ),
        trajectory=trajectory,
        config=cfg.model_dump(mode="json"),
        extras={"tv_weight": tv_weight},
        image=x.detach(),
        octave_images=octave_images,
    )
