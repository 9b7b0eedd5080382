from __future__ import annotations

from pathlib import Path

from pydantic import BaseModel, Field

from ..common.types import SplitTag

__all__ = ["EpochMetrics", "MetricsLog"]


class EpochMetrics(BaseModel):
    """One line of a training metrics log."""

    epoch: int = Field(..., ge=1)
    split: SplitTag
    loss: float
    accuracy: float = Field(..., ge=0.0, le=1.0)
    lr: float | None = None


class MetricsLog:
    """Append-only JSON Lines log of per-epoch metrics."""

    def __init__(self, path: Path | str | None = None) -> None:
        self._path = Path(path) if path is not None else None
        self.records: list[EpochMetrics] = []
        if self._path is not None:
            self._path.parent.mkdir(parents=True, exist_ok=True)
            self._path.write_text("")

    def append(self, record: EpochMetrics) -> None:
        self.records.append(record)
        if self._path is not None:
            with self._path.open("a") as handle:
                handle.write(record.model_dump_json() + "\n")

    def latest(self, split: SplitTag) -> EpochMetrics | None:
        matching = [r for r in self.records if r.split is split]
        return matching[-1] if matching else None

    @classmethod
    def read(cls, path: Path | str) -> list[EpochMetrics]:
        lines = Path(path).read_text().splitlines()
        return [
            EpochMetrics.model_validate_json(line) for line in lines if line.strip()
        ]
