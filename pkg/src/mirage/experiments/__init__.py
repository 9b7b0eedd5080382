"""Declarative experiments: train, attack, measure and report, resumably."""

from .adapters import ArtifactStore, FilesystemStore, InMemoryStore
from .config import (
    EXPERIMENT_PRESETS,
    AttackSpec,
    CrossModelPair,
    ExperimentSpec,
    MetricSuite,
    ModelSpec,
    get_experiment_preset,
    load_spec,
)
from .models import ArtifactEntry, Manifest, ReportTables, StageFailure, StageKind
from .reporting import build_report
from .service import Experiments, run_experiment

__all__ = [
    "ArtifactEntry",
    "ArtifactStore",
    "AttackSpec",
    "CrossModelPair",
    "EXPERIMENT_PRESETS",
    "ExperimentSpec",
    "Experiments",
    "FilesystemStore",
    "InMemoryStore",
    "Manifest",
    "MetricSuite",
    "ModelSpec",
    "ReportTables",
    "StageFailure",
    "StageKind",
    "build_report",
    "get_experiment_preset",
    "load_spec",
    "run_experiment",
]
