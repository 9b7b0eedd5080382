from __future__ import annotations

from ...common.types import SplitTag
from .base import DatasetSource, RawSplit

__all__ = ["InMemorySource"]


class InMemorySource(DatasetSource):
    """In-memory implementation for tests and demos."""

    def __init__(self, splits: dict[SplitTag, RawSplit]) -> None:
        self._splits = dict(splits)

    def read(self, split: SplitTag) -> RawSplit:
        return self._splits[split]
