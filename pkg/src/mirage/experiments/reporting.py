"""Summary tables built from the metric artifacts a manifest lists."""

from __future__ import annotations

import logging
from collections import defaultdict
from typing import Final

import pandas as pd
from pydantic import BaseModel

from ..common.exceptions import ManifestError
from ..privacy import (
    ModelAggregates,
    PrivacyRecord,
    RadiusReport,
    aggregate_model,
    tradeoff_curve,
)
from .adapters.base import ArtifactStore
from .models import (
    AccuracyArtifact,
    Manifest,
    MetricsArtifact,
    NA_REP,
    ReportTables,
    StageKind,
)

__all__ = ["AGGREGATE_COLUMNS", "TRADEOFF_COLUMNS", "build_report", "to_csv"]

logger = logging.getLogger(__name__)

AGGREGATE_COLUMNS: Final = [
    "model_id",
    "attack_id",
    "validation_accuracy",
    "train_accuracy",
    "reconstructions",
    "avg_max_similarity_by_class",
    "avg_max_similarity_all",
    "avg_privacy_loss_l2",
    "adversarial_radius",
    "radius_censored",
    "median_iterations_to_target",
    "mean_activation_ratio",
    "mean_displacement_l2",
]
TRADEOFF_COLUMNS: Final = [
    "attack_id",
    "model_id",
    "adversarial_radius",
    "avg_privacy_loss_l2",
]


def _load[T: BaseModel](
    store: ArtifactStore, manifest: Manifest, prefix: str, cls: type[T]
) -> list[T]:
    return [
        cls.model_validate_json(store.read_bytes(entry.paths[0]))
        for entry in manifest.of_stage(StageKind.METRICS)
        if entry.key.startswith(prefix)
    ]


def _record_stats(records: list[PrivacyRecord]) -> dict[str, float | None]:
    frame = pd.DataFrame(
        {
            "iterations": [r.iterations_to_target for r in records],
            "ratio": [r.activation_ratio for r in records],
            "displacement": [r.displacement_l2 for r in records],
        },
        dtype="float64",
    )

    def stat(series: pd.Series, how: str) -> float | None:
        value = getattr(series, how)()
        return None if pd.isna(value) else float(value)

    return {
        "median_iterations_to_target": stat(frame["iterations"], "median"),
        "mean_activation_ratio": stat(frame["ratio"], "mean"),
        "mean_displacement_l2": stat(frame["displacement"], "mean"),
    }


def _numeric(table: pd.DataFrame, first: int) -> pd.DataFrame:
    """Cast every column from ``first`` on to float64, None becoming NaN."""

    columns = list(table.columns[first:])
    return table.astype({c: "float64" for c in columns})


def build_report(manifest: Manifest, store: ArtifactStore) -> ReportTables:
    """Per-model aggregate table, trade-off table and per-reconstruction records.

    Values a partial manifest lacks show up as missing, never as zero.
    """

    if not manifest.entries:
        raise ManifestError("Cannot report on an empty manifest")

    accuracy = {
        a.model_id: a for a in _load(store, manifest, "accuracy/", AccuracyArtifact)
    }
    radius = {r.model_id: r for r in _load(store, manifest, "radius/", RadiusReport)}
    metrics = _load(store, manifest, "metrics/", MetricsArtifact)

    rows = []
    by_attack: dict[str, list[ModelAggregates]] = defaultdict(list)
    for artifact in metrics:
        acc = accuracy.get(artifact.model_id)
        agg = aggregate_model(
            artifact.model_id,
            artifact.attack_id,
            artifact.attack_config_hash,
            artifact.records,
            radius=radius.get(artifact.model_id),
            validation_accuracy=acc.validation_accuracy if acc else None,
            train_accuracy=acc.train_accuracy if acc else None,
        )
        by_attack[artifact.attack_id].append(agg)
        rows.append(agg.model_dump() | _record_stats(artifact.records))

    attacked = {artifact.model_id for artifact in metrics}
    for model_id in sorted((set(accuracy) | set(radius)) - attacked):
        acc = accuracy.get(model_id)
        rad = radius.get(model_id)
        rows.append(
            {
                "model_id": model_id,
                "validation_accuracy": acc.validation_accuracy if acc else None,
                "train_accuracy": acc.train_accuracy if acc else None,
                "adversarial_radius": rad.mean_radius if rad else None,
                "radius_censored": rad.censored_count if rad else None,
            }
        )

    tradeoff_rows = []
    for attack_id, aggregates in sorted(by_attack.items()):
        eligible = [
            a
            for a in aggregates
            if a.adversarial_radius is not None and a.avg_privacy_loss_l2 is not None
        ]
        if len(eligible) < 2:
            logger.info("No trade-off curve for %s: fewer than two models", attack_id)
            continue
        for point in tradeoff_curve(eligible):
            tradeoff_rows.append({"attack_id": attack_id, **point.model_dump()})

    records = [
        record.model_dump(exclude={"cross_activations"})
        | {f"activation_on_{k}": v for k, v in record.cross_activations.items()}
        for artifact in metrics
        for record in artifact.records
    ]
    return ReportTables(
        aggregates=_numeric(pd.DataFrame(rows, columns=AGGREGATE_COLUMNS), 2),
        tradeoff=_numeric(pd.DataFrame(tradeoff_rows, columns=TRADEOFF_COLUMNS), 2),
        records=pd.DataFrame(records),
        radius=list(radius.values()),
    )


def to_csv(table: pd.DataFrame) -> bytes:
    return table.to_csv(index=False, na_rep=NA_REP).encode()
