from __future__ import annotations

import logging
import math
from pathlib import Path
from collections.abc import Callable
from typing import Final, NamedTuple

import torch
import torch.nn.functional as F
from pydantic import BaseModel, ConfigDict, Field
from torchvision.utils import make_grid
from tqdm import tqdm

from ...classifiers import Classifier, evaluating
from ...common.atomic import atomic_write_bytes
from ...common.checkpoints import encode_checkpoint, read_checkpoint
from ...common.exceptions import EmptyDatasetError, TrainingDivergedError
from ...common.types import AttackKind
from ...data.images import save_image
from ...data.models import LabeledDataset
from ..config import GanInversionConfig
from ..models import InversionResult
from .networks import AuxDiscriminator, ConditionalGenerator

__all__ = [
    "DiscriminatorLosses",
    "GanEpochHook",
    "GanEpochLosses",
    "GanTrainingOutcome",
    "GeneratorLosses",
    "discriminator_losses",
    "discriminator_step",
    "encode_generator",
    "encode_loss_curve",
    "generate_samples",
    "generator_losses",
    "generator_step",
    "invert_class_gan",
    "load_generator",
    "read_loss_curve",
    "sample_grid",
    "save_generator",
    "target_confidence",
    "train_inversion_gan",
]

logger = logging.getLogger(__name__)

GENERATOR_KIND: Final = "generator"


class DiscriminatorLosses(NamedTuple):
    realfake: torch.Tensor
    classification: torch.Tensor


class GeneratorLosses(NamedTuple):
    adversarial: torch.Tensor
    # None when the target model was not consulted (weight 0).
    target_class: torch.Tensor | None


class GanEpochLosses(BaseModel):
    """One line of the GAN loss curve."""

    epoch: int = Field(..., ge=1)
    discriminator_realfake: float
    discriminator_class: float
    generator_adversarial: float
    generator_target_class: float | None = None
    target_confidence: float | None = None


# Receives the loss curve so far and, on sampling epochs, a grid of samples.
type GanEpochHook = Callable[[list[GanEpochLosses], torch.Tensor | None], None]


class GanTrainingOutcome(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    generator: ConditionalGenerator
    discriminator: AuxDiscriminator
    losses: list[GanEpochLosses] = Field(default_factory=list)
    sample_grids: dict[int, Path] = Field(default_factory=dict)


def discriminator_losses(
    disc: AuxDiscriminator,
    real: torch.Tensor,
    real_labels: torch.Tensor,
    fake: torch.Tensor,
) -> DiscriminatorLosses:
    """Real/fake BCE over both batches; class cross-entropy over real images only.

    Real and generated images go through the discriminator as separate
    batches, so batch-norm statistics of one never leak into the other's
    class logits.
    """

    if real.shape[0] == 0:
        raise EmptyDatasetError("discriminator step")
    real_score, real_classes = disc(real)
    fake_score, _ = disc(fake.detach())
    scores = torch.cat([real_score, fake_score])
    targets = torch.cat([torch.ones_like(real_score), torch.zeros_like(fake_score)])
    return DiscriminatorLosses(
        realfake=F.binary_cross_entropy_with_logits(scores, targets),
        classification=F.cross_entropy(real_classes, real_labels),
    )


def discriminator_step(
    disc: AuxDiscriminator,
    gen: ConditionalGenerator,
    optimizer: torch.optim.Optimizer,
    real: torch.Tensor,
    real_labels: torch.Tensor,
    noise: torch.Tensor,
    fake_labels: torch.Tensor,
) -> DiscriminatorLosses:
    """One discriminator update; the generator is only sampled."""

    with torch.no_grad():
        fake = gen(noise, fake_labels)
    losses = discriminator_losses(disc, real, real_labels, fake)
    optimizer.zero_grad(set_to_none=True)
    (losses.realfake + losses.classification).backward()
    optimizer.step()
    return DiscriminatorLosses(*(loss.detach() for loss in losses))


def generator_losses(
    gen: ConditionalGenerator,
    disc: AuxDiscriminator,
    target_model: Classifier,
    noise: torch.Tensor,
    labels: torch.Tensor,
    target_class_weight: float,
) -> GeneratorLosses:
    fake = gen(noise, labels)
    score, _ = disc(fake)
    adversarial = F.binary_cross_entropy_with_logits(score, torch.ones_like(score))
    if target_class_weight == 0:
        return GeneratorLosses(adversarial, None)
    class_loss = F.cross_entropy(target_model(fake), labels.to(target_model.device))
    return GeneratorLosses(adversarial, class_loss)


def generator_step(
    gen: ConditionalGenerator,
    disc: AuxDiscriminator,
    target_model: Classifier,
    optimizer: torch.optim.Optimizer,
    noise: torch.Tensor,
    labels: torch.Tensor,
    target_class_weight: float,
) -> GeneratorLosses:
    """Fool the discriminator and, weighted by λ_c, satisfy the target model.

    Only the generator's parameters are stepped; the target model is
    expected to be frozen by the caller.
    """

    losses = generator_losses(
        gen, disc, target_model, noise, labels, target_class_weight
    )
    total = losses.adversarial
    if losses.target_class is not None:
        total = total + target_class_weight * losses.target_class
    optimizer.zero_grad(set_to_none=True)
    total.backward()
    optimizer.step()
    return GeneratorLosses(
        losses.adversarial.detach(),
        None if losses.target_class is None else losses.target_class.detach(),
    )


def generate_samples(
    gen: ConditionalGenerator, class_id: int, n: int, seed: int
) -> torch.Tensor:
    """``n`` images of ``class_id`` as an ``(n, C, H, W)`` pixel batch."""

    device = next(gen.parameters()).device
    if n == 0:
        return torch.empty((0, *gen.image_shape), device=device)
    generator = torch.Generator().manual_seed(seed)
    noise = torch.randn(n, gen.noise_dim, generator=generator).to(device)
    labels = torch.full((n,), class_id, dtype=torch.long, device=device)
    with evaluating(gen), torch.no_grad():
        return gen(noise, labels)


def invert_class_gan(
    gen: ConditionalGenerator,
    target_model: Classifier,
    class_id: int,
    cfg: GanInversionConfig,
    *,
    seed: int = 0,
    attack_id: str = AttackKind.GAN.value,
) -> InversionResult:
    """Draw one conditioned sample and describe it like the other attacks."""

    image = generate_samples(gen, class_id, 1, seed)[0].detach().cpu()
    logits = target_model.forward_logits(image)
    activation = float(logits[class_id])
    return InversionResult(
        attack_id=attack_id,
        attack_kind=AttackKind.GAN,
        model_id=target_model.model_id,
        target_class=class_id,
        seed=seed,
        lr=cfg.lr,
        iterations_run=cfg.epochs,
        iterations_to_target=0 if int(logits.argmax()) == class_id else None,
        initial_activation=activation,
        final_activation=activation,
        config=cfg.model_dump(mode="json"),
        extras={"target_confidence": float(logits.softmax(dim=0)[class_id])},
        image=image,
    )


def target_confidence(
    gen: ConditionalGenerator,
    target_model: Classifier,
    *,
    samples_per_class: int = 8,
    seed: int = 0,
) -> float:
    """Mean softmax probability the target model gives each sample's class."""

    confidences = []
    for class_id in range(gen.num_classes):
        samples = generate_samples(gen, class_id, samples_per_class, seed + class_id)
        probs = target_model.forward_logits(samples).softmax(dim=1)
        confidences.append(probs[:, class_id].mean())
    return float(torch.stack(confidences).mean())


def sample_grid(gen: ConditionalGenerator, per_class: int, seed: int) -> torch.Tensor:
    rows = [
        generate_samples(gen, c, per_class, seed + c) for c in range(gen.num_classes)
    ]
    return make_grid(torch.cat(rows).cpu(), nrow=per_class, padding=2)


def _check_finite(epoch: int, step: int, *losses: torch.Tensor | None) -> None:
    for loss in losses:
        if loss is not None and not math.isfinite(float(loss)):
            raise TrainingDivergedError(epoch, step, float(loss))


def train_inversion_gan(
    target_model: Classifier,
    shadow: LabeledDataset,
    cfg: GanInversionConfig,
    *,
    output_dir: Path | None = None,
    run_id: str = "gan",
    on_epoch: GanEpochHook | None = None,
) -> GanTrainingOutcome:
    """Alternate discriminator and generator updates over the shadow data.

    Every ``sample_every`` epochs a sample grid is drawn and handed to
    ``on_epoch`` with the loss curve so far; other epochs get ``None``.
    With ``output_dir`` set, ``{run_id}-losses.jsonl``, the grids and
    ``{run_id}-generator.pt`` are also written there atomically. The target
    model's parameters are left bit-identical.
    """

    if len(shadow) == 0:
        raise EmptyDatasetError("GAN training")
    torch.manual_seed(cfg.seed)
    channels, height, _ = shadow.image_shape
    device = target_model.device
    gen = ConditionalGenerator(
        num_classes=shadow.num_classes,
        noise_dim=cfg.noise_dim,
        image_size=height,
        channels=channels,
        width=cfg.generator_width,
    ).to(device)
    disc = AuxDiscriminator(
        num_classes=shadow.num_classes,
        image_size=height,
        channels=channels,
        width=cfg.discriminator_width,
    ).to(device)
    opt_g = torch.optim.Adam(gen.parameters(), lr=cfg.lr, betas=cfg.betas)
    opt_d = torch.optim.Adam(disc.parameters(), lr=cfg.lr, betas=cfg.betas)
    generator = torch.Generator().manual_seed(cfg.seed)

    curve: list[GanEpochLosses] = []
    grids: dict[int, Path] = {}

    with target_model.frozen():
        for epoch in tqdm(
            range(1, cfg.epochs + 1), desc=f"gan {run_id}", disable=not cfg.progress
        ):
            gen.train()
            disc.train()
            order = torch.randperm(len(shadow), generator=generator)
            totals = torch.zeros(4, dtype=torch.float64)
            batches = 0
            for step, start in enumerate(range(0, len(shadow), cfg.batch_size)):
                index = order[start : start + cfg.batch_size]
                real = shadow.batch(index).to(device)
                real_labels = shadow.labels[index].to(device)
                n = len(index)
                fake_labels = torch.randint(
                    shadow.num_classes, (n,), generator=generator
                ).to(device)
                noise = torch.randn(n, cfg.noise_dim, generator=generator).to(device)

                d_losses = discriminator_step(
                    disc, gen, opt_d, real, real_labels, noise, fake_labels
                )
                g_losses = generator_step(
                    gen,
                    disc,
                    target_model,
                    opt_g,
                    noise,
                    fake_labels,
                    cfg.target_class_weight,
                )
                _check_finite(epoch, step, *d_losses, *g_losses)
                totals += torch.tensor(
                    [
                        float(d_losses.realfake),
                        float(d_losses.classification),
                        float(g_losses.adversarial),
                        float(g_losses.target_class)
                        if g_losses.target_class is not None
                        else 0.0,
                    ],
                    dtype=torch.float64,
                )
                batches += 1

            means = (totals / batches).tolist()
            record = GanEpochLosses(
                epoch=epoch,
                discriminator_realfake=means[0],
                discriminator_class=means[1],
                generator_adversarial=means[2],
                generator_target_class=(
                    means[3] if cfg.target_class_weight > 0 else None
                ),
                target_confidence=(
                    target_confidence(
                        gen,
                        target_model,
                        samples_per_class=cfg.samples_per_class,
                        seed=cfg.seed,
                    )
                    if cfg.target_class_weight > 0
                    else None
                ),
            )
            curve.append(record)
            logger.info("%s epoch %d: %s", run_id, epoch, record.model_dump_json())
            grid = (
                sample_grid(gen, cfg.samples_per_class, cfg.seed)
                if epoch % cfg.sample_every == 0
                else None
            )
            if output_dir is not None:
                atomic_write_bytes(
                    output_dir / f"{run_id}-losses.jsonl", encode_loss_curve(curve)
                )
                if grid is not None:
                    grids[epoch] = save_image(
                        grid, output_dir / f"{run_id}-samples-epoch{epoch}.png"
                    )
            if on_epoch is not None:
                on_epoch(curve, grid)

    gen.eval()
    disc.eval()
    if output_dir is not None:
        save_generator(gen, output_dir / f"{run_id}-generator.pt")
    return GanTrainingOutcome(
        generator=gen, discriminator=disc, losses=curve, sample_grids=grids
    )


def encode_loss_curve(curve: list[GanEpochLosses]) -> bytes:
    return "".join(record.model_dump_json() + "\n" for record in curve).encode()


def read_loss_curve(path: Path | str) -> list[GanEpochLosses]:
    lines = Path(path).read_text().splitlines()
    return [GanEpochLosses.model_validate_json(line) for line in lines if line.strip()]


def encode_generator(gen: ConditionalGenerator) -> bytes:
    header = {
        "num_classes": gen.num_classes,
        "noise_dim": gen.noise_dim,
        "image_size": gen.image_size,
        "channels": gen.channels,
        "width": gen.width,
    }
    return encode_checkpoint(GENERATOR_KIND, header, gen.state_dict())


def save_generator(gen: ConditionalGenerator, path: Path | str) -> Path:
    return atomic_write_bytes(path, encode_generator(gen))


def load_generator(source: Path | str | bytes) -> ConditionalGenerator:
    header, state = read_checkpoint(source, GENERATOR_KIND)
    gen = ConditionalGenerator(**header)
    gen.load_state_dict(state)
    gen.eval()
    return gen
