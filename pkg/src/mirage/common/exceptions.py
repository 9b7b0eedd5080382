from pathlib import Path


class MirageError(Exception):
    """Base class for mirage domain exceptions."""


class ConfigError(MirageError):
    """Raised when a configuration is structurally valid but unusable."""


class DatasetIngestionError(MirageError):
    """Raised when a dataset file is missing or corrupt."""

    def __init__(self, path: Path | str, reason: str) -> None:  # noqa: D401
        super().__init__(f"Cannot ingest {path}: {reason}")
        self.path = Path(path)
        self.reason = reason


class EmptyDatasetError(MirageError):
    """Raised when an operation needs at least one example."""

    def __init__(self, operation: str) -> None:
        super().__init__(f"{operation} requires a nonempty dataset")
        self.operation = operation


class PixelRangeError(MirageError):
    """Raised when an image leaves the [0, 255] pixel domain."""

    def __init__(self, low: float, high: float) -> None:
        super().__init__(f"Pixel values must lie in [0, 255], got [{low}, {high}]")
        self.low = low
        self.high = high


class PerturbationBudgetError(MirageError):
    """Raised when an adversarial example leaves its max-norm ball."""

    def __init__(self, drift: float, epsilon: float) -> None:
        super().__init__(f"Perturbation {drift} exceeds epsilon {epsilon}")
        self.drift = drift
        self.epsilon = epsilon


class ShapeMismatchError(MirageError):
    """Raised when two images that must be comparable have different shapes."""

    def __init__(self, left: tuple[int, ...], right: tuple[int, ...]) -> None:
        super().__init__(f"Shape mismatch: {left} vs {right}")
        self.left = left
        self.right = right


class InvalidClassError(MirageError):
    """Raised when a class id is outside [0, num_classes)."""

    def __init__(self, class_id: int, num_classes: int) -> None:
        super().__init__(f"Class id {class_id} outside [0, {num_classes})")
        self.class_id = class_id
        self.num_classes = num_classes


class CheckpointVersionError(MirageError):
    """Raised when a checkpoint was written with an unsupported format."""

    def __init__(self, found: object, expected: int, kind: str = "classifier") -> None:
        super().__init__(
            f"Unsupported {kind} checkpoint format {found!r} (expected {expected})"
        )
        self.found = found
        self.expected = expected
        self.kind = kind


class TrainingDivergedError(MirageError):
    """Raised when a training loss becomes NaN or infinite."""

    def __init__(self, epoch: int, step: int, loss: float) -> None:
        super().__init__(
            f"Training diverged at epoch {epoch}, step {step} (loss={loss})"
        )
        self.epoch = epoch
        self.step = step
        self.loss = loss


class AttackConfigMismatchError(MirageError):
    """Raised when privacy summaries were produced under different attacks."""

    def __init__(self, hashes: set[str]) -> None:
        super().__init__(
            f"Trade-off points must share one attack config, got {sorted(hashes)}"
        )
        self.hashes = hashes


class ManifestError(MirageError):
    """Raised when an experiment manifest is missing or unusable."""


class StageFailedError(MirageError):
    """Raised when a pipeline stage fails; the manifest keeps partial progress."""

    def __init__(self, stage: str, key: str, cause: BaseException) -> None:
        super().__init__(f"Stage {stage} failed for {key}: {cause}")
        self.stage = stage
        self.key = key
        self.cause = cause
