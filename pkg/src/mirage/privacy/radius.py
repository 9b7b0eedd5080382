"""Adversarial radius: L2 size of the smallest perturbation that flips a prediction."""

from __future__ import annotations

import logging

import torch

from ..classifiers import Classifier
from ..common.exceptions import EmptyDatasetError
from ..common.types import ImageTensor
from ..training.adversarial import iterated_sign_attack
from .config import RadiusConfig
from .models import RadiusReport

__all__ = ["adversarial_radius", "radius_search"]

logger = logging.getLogger(__name__)


def _flips(
    model: Classifier,
    images: ImageTensor,
    labels: torch.Tensor,
    epsilon: torch.Tensor,
    cfg: RadiusConfig,
) -> tuple[torch.Tensor, ImageTensor]:
    adv = iterated_sign_attack(
        model,
        images,
        labels,
        epsilon=epsilon,
        step_size=epsilon * cfg.step_fraction,
        iterations=cfg.iterations,
    )
    flipped = model.predict(adv).to(labels.device) != labels
    return flipped, adv


def radius_search(
    model: Classifier,
    images: ImageTensor,
    labels: torch.Tensor,
    cfg: RadiusConfig,
) -> tuple[torch.Tensor, torch.Tensor]:
    """Per-image radius and censoring flag for correctly classified images.

    Budgets grow by ``cfg.growth`` until every image flipped or hit
    ``cfg.max_epsilon``, then each bracket is bisected.
    """

    n = images.shape[0]
    dtype = images.dtype
    lo = torch.zeros(n, dtype=dtype)
    hi = torch.full((n,), float("inf"), dtype=dtype)
    best = images.detach().clone()

    eps = torch.full((n,), cfg.initial_epsilon, dtype=dtype)
    pending = torch.ones(n, dtype=torch.bool)
    while bool(pending.any()):
        index = torch.nonzero(pending).flatten()
        flipped, adv = _flips(model, images[index], labels[index], eps[index], cfg)
        flipped = flipped.cpu()
        hit = index[flipped]
        hi[hit] = eps[hit]
        best[hit] = adv[flipped].to(best.device)
        missed = index[~flipped]
        lo[missed] = eps[missed]
        at_cap = eps[missed] >= cfg.max_epsilon
        eps[missed] = torch.clamp(eps[missed] * cfg.growth, max=cfg.max_epsilon)
        pending[hit] = False
        if bool(at_cap.any()):
            capped = missed[at_cap]
            best[capped] = adv[~flipped][at_cap].to(best.device)
            pending[capped] = False

    censored = torch.isinf(hi)
    searching = torch.nonzero(~censored).flatten()
    for _ in range(cfg.bisection_steps):
        if searching.numel() == 0:
            break
        mid = (lo[searching] + hi[searching]) / 2
        flipped, adv = _flips(
            model, images[searching], labels[searching], mid, cfg
        )
        flipped = flipped.cpu()
        hit = searching[flipped]
        hi[hit] = mid[flipped]
        best[hit] = adv[flipped].to(best.device)
        lo[searching[~flipped]] = mid[~flipped]

    delta = (best - images).flatten(1).double()
    return torch.linalg.vector_norm(delta, dim=1), censored


def adversarial_radius(
    model: Classifier,
    images: ImageTensor,
    labels: torch.Tensor,
    cfg: RadiusConfig | None = None,
) -> RadiusReport:
    """Mean adversarial radius over the correctly classified ``images``.

    Misclassified inputs are skipped and counted; images that never flip are
    reported as censored at the maximum budget.
    """

    cfg = cfg or RadiusConfig()
    if images.shape[0] == 0:
        raise EmptyDatasetError("adversarial radius")
    if cfg.max_images is not None:
        images, labels = images[: cfg.max_images], labels[: cfg.max_images]
    images = images.to(torch.float32) if not images.is_floating_point() else images
    labels = labels.to(torch.long).cpu()

    radii: list[float] = []
    censored: list[bool] = []
    skipped = 0
    for start in range(0, images.shape[0], cfg.batch_size):
        batch = images[start : start + cfg.batch_size]
        batch_labels = labels[start : start + cfg.batch_size]
        correct = model.predict(batch).cpu() == batch_labels
        skipped += int((~correct).sum())
        if not bool(correct.any()):
            continue
        r, c = radius_search(model, batch[correct], batch_labels[correct], cfg)
        radii += r.tolist()
        censored += c.tolist()

    mean = float(torch.tensor(radii, dtype=torch.float64).mean()) if radii else 0.0
    logger.info(
        "%s adversarial radius %.3f over %d images (%d skipped, %d censored)",
        model.model_id,
        mean,
        len(radii),
        skipped,
        sum(censored),
    )
    return RadiusReport(
        model_id=model.model_id,
        mean_radius=mean,
        radii=radii,
        censored=censored,
        evaluated=len(radii),
        skipped_misclassified=skipped,
        max_epsilon=cfg.max_epsilon,
        config_hash=cfg.config_hash(),
    )
