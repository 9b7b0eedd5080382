from __future__ import annotations

from enum import Enum

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from ..privacy.models import PrivacyRecord, RadiusReport

__all__ = [
    "AccuracyArtifact",
    "ArtifactEntry",
    "MANIFEST_KEY",
    "Manifest",
    "NA_REP",
    "MetricsArtifact",
    "ReportTables",
    "StageFailure",
    "StageKind",
]

MANIFEST_KEY = "manifest.json"
NA_REP = "NA"


class StageKind(str, Enum):
    """Pipeline stages in dependency order."""

    TRAIN = "train"
    ATTACK = "attack"
    METRICS = "metrics"
    REPORT = "report"

    @property
    def order(self) -> int:
        return list(StageKind).index(self)


class ArtifactEntry(BaseModel):
    """Files one stage item produced and the config hash they were made under."""

    key: str
    stage: StageKind
    paths: list[str]
    config_hash: str
    seed: int | None = None
    upstream: list[str] = Field(default_factory=list)


class StageFailure(BaseModel):
    stage: StageKind
    key: str
    error: str


class Manifest(BaseModel):
    """Every artifact of an experiment run.

    Holds no timestamps, so an unchanged rerun writes identical bytes.
    """

    version: int = 1
    experiment: str
    seed: int
    entries: dict[str, ArtifactEntry] = Field(default_factory=dict)
    failures: list[StageFailure] = Field(default_factory=list)

    @property
    def complete(self) -> bool:
        return not self.failures

    def of_stage(self, stage: StageKind) -> list[ArtifactEntry]:
        return [e for e in self.entries.values() if e.stage is stage]

    def add(self, entry: ArtifactEntry) -> None:
        self.entries[entry.key] = entry
        self.entries = dict(sorted(self.entries.items()))

    def dump(self) -> bytes:
        return self.model_dump_json(indent=2).encode()


class AccuracyArtifact(BaseModel):
    model_id: str
    train_accuracy: float
    validation_accuracy: float


class MetricsArtifact(BaseModel):
    """Privacy records of one attack against one model."""

    attack_id: str
    model_id: str
    attack_config_hash: str
    records: list[PrivacyRecord] = Field(default_factory=list)


def _mark_missing(table: pd.DataFrame) -> pd.DataFrame:
    # to_string leaves None in object columns as "None" whatever na_rep is
    return table.astype(object).where(table.notna(), NA_REP)


class ReportTables(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    aggregates: pd.DataFrame
    tradeoff: pd.DataFrame
    records: pd.DataFrame
    radius: list[RadiusReport] = Field(default_factory=list)

    def render(self) -> str:
        sections = [
            ("Per-model aggregates", self.aggregates),
            ("Adversarial radius vs privacy loss", self.tradeoff),
        ]
        return "\n\n".join(
            f"{title}\n{_mark_missing(table).to_string(index=False)}"
            for title, table in sections
        )
