from __future__ import annotations

from typing import NamedTuple, Protocol

import numpy as np
import numpy.typing as npt

from ...common.types import SplitTag

__all__ = ["DatasetSource", "RawSplit"]


class RawSplit(NamedTuple):
    """A decoded split: ``uint8`` images ``(N, C, H, W)`` and ``int64`` labels."""

    images: npt.NDArray[np.uint8]
    labels: npt.NDArray[np.int64]


class DatasetSource(Protocol):
    """Reads one published split of an image-classification dataset."""

    def read(self, split: SplitTag) -> RawSplit: ...
