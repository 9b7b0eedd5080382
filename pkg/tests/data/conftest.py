import pickle
from pathlib import Path

import numpy as np
import pytest

from mirage.common.types import SplitTag
from mirage.data.adapters import InMemorySource, RawSplit

RECORD = 1 + 3 * 32 * 32


def raw_split(n: int, *, size: int = 32, seed: int = 0) -> RawSplit:
    rng = np.random.default_rng(seed)
    return RawSplit(
        images=rng.integers(0, 256, (n, 3, size, size), dtype=np.uint8),
        labels=(np.arange(n) % 10).astype(np.int64),
    )


def write_binary_batch(path: Path, raw: RawSplit) -> None:
    records = np.concatenate(
        [raw.labels.astype(np.uint8)[:, None], raw.images.reshape(len(raw.labels), -1)],
        axis=1,
    )
    records.tofile(path)


def write_pickle_batch(path: Path, raw: RawSplit) -> None:
    batch = {
        b"data": raw.images.reshape(len(raw.labels), -1),
        b"labels": raw.labels.tolist(),
    }
    with path.open("wb") as handle:
        pickle.dump(batch, handle)


@pytest.fixture
def binary_dir(tmp_path: Path) -> Path:
    directory = tmp_path / "cifar-10-batches-bin"
    directory.mkdir()
    for i in range(1, 6):
        write_binary_batch(directory / f"data_batch_{i}.bin", raw_split(4, seed=i))
    write_binary_batch(directory / "test_batch.bin", raw_split(6, seed=9))
    return directory


@pytest.fixture
def pickle_dir(tmp_path: Path) -> Path:
    directory = tmp_path / "cifar-10-batches-py"
    directory.mkdir()
    for i in range(1, 6):
        write_pickle_batch(directory / f"data_batch_{i}", raw_split(2, seed=i))
    write_pickle_batch(directory / "test_batch", raw_split(3, seed=9))
    return directory


@pytest.fixture
def memory_source() -> InMemorySource:
    return InMemorySource(
        {
            SplitTag.TRAIN: raw_split(40, seed=1),
            SplitTag.VALIDATION: raw_split(20, seed=2),
        }
    )
