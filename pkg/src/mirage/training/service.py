from __future__ import annotations

import logging
import math
from collections.abc import Callable
from pathlib import Path

import torch
import torch.nn.functional as F
from pydantic import BaseModel, ConfigDict, Field
from tqdm import tqdm

from ..classifiers import Classifier, evaluating, save_checkpoint
from ..common.exceptions import EmptyDatasetError, TrainingDivergedError
from ..common.types import SplitTag, TrainingRegime
from ..data.models import LabeledDataset
from .adversarial import generate_adversarial_batch
from .config import AdvTrainConfig, OptimizerKind, TrainConfig
from .metrics_log import EpochMetrics, MetricsLog

__all__ = [
    "TrainingOutcome",
    "evaluate",
    "evaluate_accuracy",
    "train_adversarial",
    "train_standard",
]

logger = logging.getLogger(__name__)

# Called with (epoch, model) at every configured checkpoint epoch.
type CheckpointHook = Callable[[int, Classifier], None]


class TrainingOutcome(BaseModel):
    """A trained model, its metrics and any checkpoints written on the way."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    model: Classifier
    metrics: list[EpochMetrics] = Field(default_factory=list)
    checkpoints: dict[int, Path] = Field(default_factory=dict)


def _build_optimizer(model: Classifier, cfg: TrainConfig) -> torch.optim.Optimizer:
    spec = cfg.optimizer
    lr = spec.lr_at(0)
    if spec.kind is OptimizerKind.ADAM:
        return torch.optim.Adam(
            model.parameters(), lr=lr, weight_decay=spec.weight_decay
        )
    return torch.optim.SGD(
        model.parameters(),
        lr=lr,
        momentum=spec.momentum,
        weight_decay=spec.weight_decay,
    )


def _augment(images: torch.Tensor, generator: torch.Generator) -> torch.Tensor:
    """Random crop with 4-pixel zero padding and random horizontal flip."""

    n, _, height, width = images.shape
    padded = F.pad(images, (4, 4, 4, 4))
    offsets = torch.randint(0, 9, (n, 2), generator=generator)
    flips = torch.rand(n, generator=generator) < 0.5
    out = torch.empty_like(images)
    for i in range(n):
        dy, dx = int(offsets[i, 0]), int(offsets[i, 1])
        crop = padded[i, :, dy : dy + height, dx : dx + width]
        out[i] = crop.flip(-1) if flips[i] else crop
    return out


@torch.no_grad()
def evaluate(
    model: Classifier, dataset: LabeledDataset, *, batch_size: int = 256
) -> tuple[float, float]:
    """Mean cross-entropy and top-1 accuracy of ``model`` on ``dataset``."""

    if len(dataset) == 0:
        raise EmptyDatasetError("evaluate_accuracy")
    total_loss, correct = 0.0, 0
    with evaluating(model):
        for start in range(0, len(dataset), batch_size):
            index = torch.arange(start, min(start + batch_size, len(dataset)))
            labels = dataset.labels[index].to(model.device)
            logits = model(dataset.batch(index))
            total_loss += float(F.cross_entropy(logits, labels, reduction="sum"))
            correct += int((logits.argmax(dim=1) == labels).sum())
    return total_loss / len(dataset), correct / len(dataset)


def evaluate_accuracy(
    model: Classifier, dataset: LabeledDataset, *, batch_size: int = 256
) -> float:
    return evaluate(model, dataset, batch_size=batch_size)[1]


def _fit(
    model: Classifier,
    train_set: LabeledDataset,
    cfg: TrainConfig,
    adv: AdvTrainConfig | None,
    *,
    validation: LabeledDataset | None,
    checkpoint_dir: Path | None,
    metrics_path: Path | None,
    on_checkpoint: CheckpointHook | None,
) -> TrainingOutcome:
    if len(train_set) == 0:
        raise EmptyDatasetError("training")

    generator = torch.Generator().manual_seed(cfg.seed)
    optimizer = _build_optimizer(model, cfg)
    log = MetricsLog(metrics_path)
    checkpoints: dict[int, Path] = {}
    regime = TrainingRegime.ATM if adv is not None else TrainingRegime.TTM
    model.metadata = model.metadata.model_copy(update={"regime": regime})
    first_epoch = model.metadata.epochs

    for epoch in tqdm(
        range(first_epoch, first_epoch + cfg.epochs),
        desc=f"train {model.model_id}",
        disable=not cfg.progress,
    ):
        lr = cfg.optimizer.lr_at(epoch - first_epoch)
        for group in optimizer.param_groups:
            group["lr"] = lr

        order = torch.randperm(len(train_set), generator=generator)
        total_loss, correct = 0.0, 0
        for step, start in enumerate(range(0, len(train_set), cfg.batch_size)):
            index = order[start : start + cfg.batch_size]
            images = train_set.batch(index)
            if cfg.augment:
                images = _augment(images, generator)
            images = images.to(model.device)
            labels = train_set.labels[index].to(model.device)
            if adv is not None:
                images = generate_adversarial_batch(
                    model, images, labels, adv, generator=generator
                )

            model.train()
            logits = model(images)
            loss = F.cross_entropy(logits, labels)
            if not math.isfinite(float(loss)):
                raise TrainingDivergedError(epoch + 1, step, float(loss))
            optimizer.zero_grad(set_to_none=True)
            loss.backward()
            optimizer.step()

            total_loss += float(loss) * len(index)
            correct += int((logits.argmax(dim=1) == labels).sum())

        completed = epoch + 1
        model.metadata = model.metadata.model_copy(update={"epochs": completed})
        log.append(
            EpochMetrics(
                epoch=completed,
                split=SplitTag.TRAIN,
                loss=total_loss / len(train_set),
                accuracy=correct / len(train_set),
                lr=lr,
            )
        )
        if validation is not None and len(validation):
            val_loss, val_acc = evaluate(model, validation)
            log.append(
                EpochMetrics(
                    epoch=completed,
                    split=SplitTag.VALIDATION,
                    loss=val_loss,
                    accuracy=val_acc,
                    lr=lr,
                )
            )
        logger.info(
            "%s epoch %d: %s",
            model.model_id,
            completed,
            ", ".join(
                f"{r.split.value} loss={r.loss:.4f} acc={r.accuracy:.4f}"
                for r in log.records
                if r.epoch == completed
            ),
        )

        if completed in cfg.checkpoint_epochs:
            if on_checkpoint is not None:
                on_checkpoint(completed, model)
            if checkpoint_dir is not None:
                path = checkpoint_dir / f"{model.model_id}-epoch{completed}.pt"
                checkpoints[completed] = save_checkpoint(model, path)

    model.eval()
    if checkpoint_dir is not None:
        path = checkpoint_dir / f"{model.model_id}.pt"
        checkpoints[model.metadata.epochs] = save_checkpoint(model, path)
    return TrainingOutcome(model=model, metrics=log.records, checkpoints=checkpoints)


def train_standard(
    model: Classifier,
    train_set: LabeledDataset,
    cfg: TrainConfig,
    *,
    validation: LabeledDataset | None = None,
    checkpoint_dir: Path | None = None,
    metrics_path: Path | None = None,
    on_checkpoint: CheckpointHook | None = None,
) -> TrainingOutcome:
    """Traditional empirical-risk training (TTM)."""

    return _fit(
        model,
        train_set,
        cfg,
        None,
        validation=validation,
        checkpoint_dir=checkpoint_dir,
        metrics_path=metrics_path,
        on_checkpoint=on_checkpoint,
    )


def train_adversarial(
    model: Classifier,
    train_set: LabeledDataset,
    cfg: TrainConfig,
    adv: AdvTrainConfig,
    *,
    validation: LabeledDataset | None = None,
    checkpoint_dir: Path | None = None,
    metrics_path: Path | None = None,
    on_checkpoint: CheckpointHook | None = None,
) -> TrainingOutcome:
    """Min-max training: every step fits adversarial batches made against the
    current parameters (ATM)."""

    return _fit(
        model,
        train_set,
        cfg,
        adv,
        validation=validation,
        checkpoint_dir=checkpoint_dir,
        metrics_path=metrics_path,
        on_checkpoint=on_checkpoint,
    )
