from __future__ import annotations

import logging
from collections import defaultdict
from collections.abc import Sequence

import torch

from ..classifiers import Classifier
from ..common.exceptions import (
    AttackConfigMismatchError,
    ConfigError,
    EmptyDatasetError,
    ShapeMismatchError,
)
from ..common.types import ImageTensor
from ..data.models import LabeledDataset
from ..inversion.models import InversionResult
from .config import FeatureConfig
from .models import (
    ActivationStatistics,
    ModelAggregates,
    NearestMatch,
    PrivacyRecord,
    RadiusReport,
    TradeoffPoint,
)

__all__ = [
    "FeatureIndex",
    "activation_statistics",
    "aggregate_model",
    "evaluate_reconstructions",
    "feature_cosine_nn",
    "privacy_loss_l2",
    "tradeoff_curve",
]

logger = logging.getLogger(__name__)

ACTIVATION_BATCH_SIZE = 256


def _unit(features: torch.Tensor) -> torch.Tensor:
    norms = torch.linalg.vector_norm(features, dim=-1, keepdim=True)
    return features / norms.clamp_min(torch.finfo(features.dtype).tiny)


class FeatureIndex:
    """Cached unit-norm final-convolution features of a training set.

    The feature matrix is computed once and never modified afterwards.
    """

    def __init__(
        self,
        model: Classifier,
        train_set: LabeledDataset,
        cfg: FeatureConfig | None = None,
    ) -> None:
        if len(train_set) == 0:
            raise EmptyDatasetError("nearest-neighbor search")
        cfg = cfg or FeatureConfig()
        self.model = model
        self.train_set = train_set
        chunks = [
            model.penultimate_features(images.to(torch.float32)).cpu().double()
            for images in train_set.images.split(cfg.batch_size)
        ]
        self._features = _unit(torch.cat(chunks))
        logger.debug(
            "Indexed %d training features of dimension %d with %s",
            len(train_set),
            self._features.shape[1],
            model.model_id,
        )

    @property
    def model_id(self) -> str:
        return self.model.model_id

    def __len__(self) -> int:
        return self._features.shape[0]

    def similarities(self, recon: ImageTensor) -> torch.Tensor:
        query = _unit(self.model.penultimate_features(recon).cpu().double())
        return (self._features @ query).clamp(-1.0, 1.0)

    def nearest(self, recon: ImageTensor) -> NearestMatch:
        """Most similar training image; the lowest index wins ties."""

        sims = self.similarities(recon)
        index = int(torch.argmax(sims))
        return NearestMatch(index=index, similarity=float(sims[index]))

    def top_k(self, recon: ImageTensor, k: int) -> list[NearestMatch]:
        sims = self.similarities(recon)
        order = torch.argsort(sims, descending=True, stable=True)[:k]
        return [
            NearestMatch(index=int(i), similarity=float(sims[i])) for i in order
        ]


def feature_cosine_nn(
    model: Classifier,
    recon: ImageTensor,
    train_set: LabeledDataset,
    *,
    index: FeatureIndex | None = None,
) -> NearestMatch:
    """Training image whose final-convolution features are closest in cosine."""

    index = index or FeatureIndex(model, train_set)
    return index.nearest(recon)


def privacy_loss_l2(recon: ImageTensor, nearest: ImageTensor) -> float:
    """Raw Euclidean distance over all pixels, in 0-255 units."""

    if tuple(recon.shape) != tuple(nearest.shape):
        raise ShapeMismatchError(tuple(recon.shape), tuple(nearest.shape))
    diff = recon.detach().cpu().double() - nearest.detach().cpu().double()
    return float(torch.linalg.vector_norm(diff))


def _class_mean_activation(
    scorer: Classifier, train_set: LabeledDataset, class_id: int, batch_size: int
) -> tuple[float | None, int]:
    members = train_set.of_class(class_id)
    if not len(members):
        return None, 0
    total = torch.zeros((), dtype=torch.float64)
    for images in members.images.split(batch_size):
        acts = scorer.class_activations(images.to(torch.float32), class_id)
        total += acts.double().sum().cpu()
    return float(total / len(members)), len(members)


def activation_statistics(
    model: Classifier,
    recon: ImageTensor,
    train_set: LabeledDataset,
    class_id: int,
    *,
    evaluation_model: Classifier | None = None,
    batch_size: int = ACTIVATION_BATCH_SIZE,
) -> ActivationStatistics:
    """Class activation of ``recon`` and the mean over that class's training images.

    ``evaluation_model`` scores a reconstruction made on ``model`` with a
    different classifier.
    """

    scorer = evaluation_model or model
    train_activation, count = _class_mean_activation(
        scorer, train_set, class_id, batch_size
    )
    return ActivationStatistics(
        model_id=scorer.model_id,
        class_id=class_id,
        reconstruction_activation=scorer.class_activation(recon, class_id),
        train_activation=train_activation,
        train_count=count,
    )


def evaluate_reconstructions(
    model: Classifier,
    results: Sequence[InversionResult],
    train_set: LabeledDataset,
    *,
    index: FeatureIndex | None = None,
) -> list[PrivacyRecord]:
    """Nearest-training-image, privacy loss and activation gap per reconstruction.

    The mean training activation is computed once per target class.
    """

    index = index or FeatureIndex(model, train_set)
    class_means: dict[int, tuple[float | None, int]] = {}
    records = []
    for result in results:
        match = index.nearest(result.image)
        nearest = train_set.image(match.index)
        target = result.target_class
        if target not in class_means:
            class_means[target] = _class_mean_activation(
                model, train_set, target, ACTIVATION_BATCH_SIZE
            )
        train_activation, count = class_means[target]
        stats = ActivationStatistics(
            model_id=model.model_id,
            class_id=target,
            reconstruction_activation=model.class_activation(result.image, target),
            train_activation=train_activation,
            train_count=count,
        )
        records.append(
            PrivacyRecord(
                model_id=result.model_id,
                attack_id=result.attack_id,
                target_class=result.target_class,
                seed=result.seed,
                feature_model_id=index.model_id,
                nearest_index=match.index,
                nearest_source_index=int(train_set.source_indices[match.index]),
                similarity=match.similarity,
                privacy_loss_l2=privacy_loss_l2(result.image, nearest),
                reconstruction_activation=stats.reconstruction_activation,
                train_activation=stats.train_activation,
                activation_ratio=stats.ratio,
                iterations_to_target=result.iterations_to_target,
                displacement_l2=result.displacement_l2,
            )
        )
    return records


def _mean(values: Sequence[float]) -> float | None:
    return sum(values) / len(values) if values else None


def aggregate_model(
    model_id: str,
    attack_id: str,
    attack_config_hash: str,
    records: Sequence[PrivacyRecord],
    *,
    radius: RadiusReport | None = None,
    validation_accuracy: float | None = None,
    train_accuracy: float | None = None,
) -> ModelAggregates:
    """Per-model aggregates.

    ``avg_max_similarity_by_class`` averages, over classes, the best
    similarity among that class's reconstructions; ``avg_max_similarity_all``
    averages every reconstruction's nearest-neighbor similarity.
    """

    by_class: dict[int, float] = defaultdict(lambda: -1.0)
    for record in records:
        by_class[record.target_class] = max(
            by_class[record.target_class], record.similarity
        )
    return ModelAggregates(
        model_id=model_id,
        attack_id=attack_id,
        attack_config_hash=attack_config_hash,
        reconstructions=len(records),
        avg_max_similarity_by_class=_mean(list(by_class.values())),
        avg_max_similarity_all=_mean([r.similarity for r in records]),
        avg_privacy_loss_l2=_mean([r.privacy_loss_l2 for r in records]),
        adversarial_radius=radius.mean_radius if radius else None,
        radius_censored=radius.censored_count if radius else None,
        radius_config_hash=radius.config_hash if radius else None,
        validation_accuracy=validation_accuracy,
        train_accuracy=train_accuracy,
    )


def tradeoff_curve(aggregates: Sequence[ModelAggregates]) -> list[TradeoffPoint]:
    """One (adversarial radius, average privacy loss) point per model, by radius."""

    if len(aggregates) < 2:
        raise ConfigError("A trade-off curve needs at least two evaluated models")
    hashes = {
        f"{a.attack_config_hash}/{a.radius_config_hash}" for a in aggregates
    }
    if len(hashes) > 1:
        raise AttackConfigMismatchError(hashes)
    points = []
    for agg in aggregates:
        if agg.adversarial_radius is None or agg.avg_privacy_loss_l2 is None:
            raise ConfigError(f"{agg.model_id} lacks a radius or privacy loss")
        points.append(
            TradeoffPoint(
                model_id=agg.model_id,
                adversarial_radius=agg.adversarial_radius,
                avg_privacy_loss_l2=agg.avg_privacy_loss_l2,
            )
        )
    return sorted(points, key=lambda p: p.adversarial_radius)
