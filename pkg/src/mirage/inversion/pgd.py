"""Clipped gradient ascent on a class activation, in pixel space."""

from __future__ import annotations

import logging

import torch

from ..classifiers import Classifier
from ..common.types import PIXEL_MAX, PIXEL_MIN, AttackKind, ImageTensor
from ..data.images import check_pixel_range
from .config import PgdInversionConfig
from .initialization import initial_image, model_image_shape
from .models import InversionResult, TrajectoryPoint

__all__ = ["calibrate_lr", "invert_class", "invert_from_seed_image", "pgd_step"]

logger = logging.getLogger(__name__)


def _apply(x: ImageTensor, grad: torch.Tensor, lr: float) -> ImageTensor:
    return check_pixel_range(torch.clamp(x + lr * grad, PIXEL_MIN, PIXEL_MAX))


def pgd_step(
    x: ImageTensor, model: Classifier, class_id: int, lr: float
) -> ImageTensor:
    """X' = clip(X + lr * G, 0, 255), G the input gradient of the class logit."""

    return _apply(x, model.input_gradient(x, class_id), lr)


def calibrate_lr(grad: torch.Tensor, target_step: float) -> float:
    """Learning rate whose largest per-pixel change equals ``target_step``."""

    peak = float(grad.abs().max())
    return target_step / peak if peak > 0 else target_step


def _run(
    model: Classifier,
    x0: ImageTensor,
    cfg: PgdInversionConfig,
    *,
    attack_id: str,
    seed_image: ImageTensor | None = None,
) -> InversionResult:
    target = cfg.target_class
    x = x0
    logits, grad = model.logits_and_gradient(x, target)
    initial_activation = float(logits[target])
    lr = cfg.lr if cfg.lr is not None else calibrate_lr(grad, cfg.calibration_step)
    if cfg.lr is None:
        logger.info("Calibrated inversion lr for %s: %.4g", model.model_id, lr)

    trajectory: list[TrajectoryPoint] = []
    iterations_to_target: int | None = None
    for t in range(cfg.max_iterations):
        if iterations_to_target is None and int(logits.argmax()) == target:
            iterations_to_target = t
        x = _apply(x, grad, lr)
        if t + 1 < cfg.max_iterations:
            logits, grad = model.logits_and_gradient(x, target)
        else:
            logits = model.forward_logits(x)
        if cfg.record_trajectory:
            trajectory.append(
                TrajectoryPoint(iteration=t + 1, activation=float(logits[target]))
            )
    if iterations_to_target is None and int(logits.argmax()) == target:
        iterations_to_target = cfg.max_iterations

    displacement = None
    if seed_image is not None:
        displacement = float(torch.linalg.vector_norm((x - seed_image).double()))

    logger.debug(
        "%s on %s class %d: %s iterations to target",
        attack_id,
        model.model_id,
        target,
        iterations_to_target,
    )
    return InversionResult(
        attack_id=attack_id,
        attack_kind=AttackKind.PGD,
        model_id=model.model_id,
        target_class=target,
        seed=cfg.seed,
        lr=lr,
        iterations_run=cfg.max_iterations,
        iterations_to_target=iterations_to_target,
        initial_activation=initial_activation,
        final_activation=float(logits[target]),
        displacement_l2=displacement,
        trajectory=trajectory,
        config=cfg.model_dump(mode="json"),
        image=x.detach(),
    )


def invert_class(
    model: Classifier,
    cfg: PgdInversionConfig,
    *,
    image_shape: tuple[int, int, int] | None = None,
    attack_id: str = AttackKind.PGD.value,
) -> InversionResult:
    """Maximize the target-class logit starting from the configured init."""

    shape = image_shape or model_image_shape(model)
    x0 = initial_image(cfg.init, shape, seed=cfg.seed)
    return _run(model, x0, cfg, attack_id=attack_id)


def invert_from_seed_image(
    model: Classifier,
    seed_img: ImageTensor,
    cfg: PgdInversionConfig,
    *,
    attack_id: str = "pgd-seeded",
) -> InversionResult:
    """Same ascent starting from a real image; records L2 displacement from it."""

    channels, height, width = seed_img.shape
    x0 = initial_image(cfg.init, (channels, height, width), seed_image=seed_img)
    return _run(model, x0, cfg, attack_id=attack_id, seed_image=x0.clone())
