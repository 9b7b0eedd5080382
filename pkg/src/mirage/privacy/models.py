from __future__ import annotations

from pydantic import BaseModel, Field

__all__ = [
    "ActivationStatistics",
    "ModelAggregates",
    "NearestMatch",
    "PrivacyRecord",
    "RadiusReport",
    "TradeoffPoint",
]


class NearestMatch(BaseModel):
    index: int = Field(..., ge=0)
    similarity: float = Field(..., ge=-1.0, le=1.0)


class ActivationStatistics(BaseModel):
    """Target-class activation of a reconstruction against the training average.

    ``model_id`` is the model that produced the scores, which need not be
    the model the reconstruction was made on.
    """

    model_id: str
    class_id: int
    reconstruction_activation: float
    train_activation: float | None = None
    train_count: int = 0

    @property
    def ratio(self) -> float | None:
        if not self.train_activation:
            return None
        return self.reconstruction_activation / self.train_activation


class PrivacyRecord(BaseModel):
    """Metrics for one (model, attack, class, seed) reconstruction."""

    model_id: str
    attack_id: str
    target_class: int
    seed: int
    feature_model_id: str
    nearest_index: int = Field(..., ge=0)
    nearest_source_index: int = Field(..., ge=0)
    similarity: float = Field(..., ge=-1.0, le=1.0)
    privacy_loss_l2: float = Field(..., ge=0.0)
    reconstruction_activation: float
    train_activation: float | None = None
    activation_ratio: float | None = None
    iterations_to_target: int | None = None
    displacement_l2: float | None = None
    cross_activations: dict[str, float] = Field(
        default_factory=dict,
        description="Reconstruction activation scored by other models, by model id.",
    )


class RadiusReport(BaseModel):
    """Adversarial radius of one model over an evaluation set.

    Censored images never flipped within ``max_epsilon``; their radius is
    the L2 norm reached at that budget and they are included in the mean.
    """

    model_id: str
    mean_radius: float = Field(..., ge=0.0)
    radii: list[float] = Field(default_factory=list)
    censored: list[bool] = Field(default_factory=list)
    evaluated: int = Field(default=0, ge=0)
    skipped_misclassified: int = Field(default=0, ge=0)
    max_epsilon: float
    config_hash: str

    @property
    def censored_count(self) -> int:
        return sum(self.censored)


class ModelAggregates(BaseModel):
    model_id: str
    attack_id: str
    attack_config_hash: str
    reconstructions: int = Field(default=0, ge=0)
    avg_max_similarity_by_class: float | None = None
    avg_max_similarity_all: float | None = None
    avg_privacy_loss_l2: float | None = None
    adversarial_radius: float | None = None
    radius_censored: int | None = None
    radius_config_hash: str | None = None
    validation_accuracy: float | None = None
    train_accuracy: float | None = None


class TradeoffPoint(BaseModel):
    model_id: str
    adversarial_radius: float = Field(..., ge=0.0)
    avg_privacy_loss_l2: float = Field(..., ge=0.0)

