"""How much a reconstruction reveals, and how robust the model it came from is."""

from .config import FeatureConfig, RadiusConfig
from .models import (
    ActivationStatistics,
    ModelAggregates,
    NearestMatch,
    PrivacyRecord,
    RadiusReport,
    TradeoffPoint,
)
from .radius import adversarial_radius, radius_search
from .service import (
    FeatureIndex,
    activation_statistics,
    aggregate_model,
    evaluate_reconstructions,
    feature_cosine_nn,
    privacy_loss_l2,
    tradeoff_curve,
)

__all__ = [
    "ActivationStatistics",
    "FeatureConfig",
    "FeatureIndex",
    "ModelAggregates",
    "NearestMatch",
    "PrivacyRecord",
    "RadiusConfig",
    "RadiusReport",
    "TradeoffPoint",
    "activation_statistics",
    "adversarial_radius",
    "aggregate_model",
    "evaluate_reconstructions",
    "feature_cosine_nn",
    "privacy_loss_l2",
    "radius_search",
    "tradeoff_curve",
]
