from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from functools import partial

import torch
from pydantic import BaseModel, ValidationError

from ..classifiers import Classifier, build_model, encode_classifier, load_checkpoint
from ..common.exceptions import (
    ConfigError,
    EmptyDatasetError,
    ManifestError,
    StageFailedError,
)
from ..common.types import AttackKind, ImageTensor
from ..data.adapters import DatasetSource
from ..data.images import encode_png, image_filename, load_image
from ..data.models import LabeledDataset
from ..data.service import load_splits
from ..inversion import (
    DreamConfig,
    GanInversionConfig,
    InversionRecord,
    InversionResult,
    PgdInversionConfig,
    invert_class,
    invert_class_multiscale,
    invert_from_seed_image,
)
from ..inversion.gan import (
    ConditionalGenerator,
    GanEpochLosses,
    encode_generator,
    encode_loss_curve,
    invert_class_gan,
    load_generator,
    sample_grid,
    train_inversion_gan,
)
from ..privacy import (
    FeatureIndex,
    adversarial_radius,
    evaluate_reconstructions,
)
from ..training import evaluate_accuracy, train_adversarial, train_standard
from ..training.presets import ModelRecipe
from .adapters import ArtifactStore, FilesystemStore
from .config import AttackSpec, ExperimentSpec, ModelSpec
from .hashing import config_hash
from .models import (
    MANIFEST_KEY,
    AccuracyArtifact,
    ArtifactEntry,
    Manifest,
    MetricsArtifact,
    ReportTables,
    StageFailure,
    StageKind,
)
from .reporting import build_report, to_csv

__all__ = ["Experiments", "run_experiment"]

logger = logging.getLogger(__name__)

REPORT_PATHS = (
    "reports/aggregates.csv",
    "reports/tradeoff.csv",
    "reports/records.csv",
    "reports/summary.txt",
)


def _jsonl(records: Sequence[BaseModel]) -> bytes:
    return "".join(r.model_dump_json() + "\n" for r in records).encode()


class Experiments:
    """Runs an experiment spec stage by stage: train, attack, metrics, report.

    Each stage item is keyed in the manifest with the hash of its full
    config and its upstream hashes; with ``resume`` an item whose hash
    matches and whose files still exist is skipped.
    """

    def __init__(
        self,
        spec: ExperimentSpec,
        store: ArtifactStore | None = None,
        *,
        source: DatasetSource | None = None,
    ) -> None:
        self.spec = spec
        self.store = store or FilesystemStore(spec.output_dir)
        self._source = source
        self._splits: tuple[LabeledDataset, LabeledDataset] | None = None
        self._models: dict[str, Classifier] = {}
        self._generators: dict[str, ConditionalGenerator] = {}
        self._indexes: dict[str, FeatureIndex] = {}
        self._model_hashes: dict[str, str] = {}
        self._attack_hashes: dict[str, str] = {}
        self._reconstructions: dict[tuple[str, str], list[ArtifactEntry]] = {}
        self._previous: Manifest | None = None
        self._manifest = self._fresh_manifest()
        self._dataset_hash = config_hash("dataset", spec.dataset)

    # -- manifest -----------------------------------------------------------

    def _fresh_manifest(self) -> Manifest:
        return Manifest(experiment=self.spec.name, seed=self.spec.seed)

    def load_manifest(self) -> Manifest | None:
        if not self.store.exists(MANIFEST_KEY):
            return None
        try:
            return Manifest.model_validate_json(self.store.read_bytes(MANIFEST_KEY))
        except ValidationError as exc:
            raise ManifestError(f"Unreadable manifest: {exc}") from exc

    def _write_manifest(self) -> None:
        self.store.write_bytes(MANIFEST_KEY, self._manifest.dump())

    def planned_keys(self) -> set[str]:
        """Manifest keys the current spec produces when run to the end."""

        keys = {"report"}
        for model_spec in self.spec.models:
            keys.add(f"train/{model_spec.model_id}")
            keys.update(f"train/{sid}" for sid in model_spec.snapshot_ids())
        for model_id in self.spec.all_model_ids():
            keys.add(f"accuracy/{model_id}")
            if self.spec.metrics.radius:
                keys.add(f"radius/{model_id}")
        for attack in self.spec.attacks:
            for model_id in attack.model_ids:
                if attack.kind is AttackKind.GAN:
                    keys.add(self._gan_key(attack, model_id))
                if self.spec.metrics.similarity:
                    keys.add(f"metrics/{attack.attack_id}/{model_id}")
                keys.update(
                    f"attack/{attack.attack_id}/{model_id}/c{class_id}/s{seed}"
                    for class_id in attack.classes
                    for seed in attack.seeds
                )
        return keys

    def _item(
        self,
        stage: StageKind,
        key: str,
        digest: str,
        produce: Callable[[], list[str]],
        *,
        seed: int | None = None,
        upstream: Sequence[str] = (),
    ) -> ArtifactEntry:
        previous = self._previous.entries.get(key) if self._previous else None
        if (
            previous is not None
            and previous.config_hash == digest
            and all(self.store.exists(path) for path in previous.paths)
        ):
            logger.info("Skipping %s (up to date)", key)
            self._manifest.add(previous)
            return previous

        logger.info("Running %s", key)
        try:
            paths = produce()
        except Exception as exc:
            self._manifest.failures.append(
                StageFailure(stage=stage, key=key, error=f"{type(exc).__name__}: {exc}")
            )
            self._write_manifest()
            if isinstance(exc, ConfigError):
                raise
            raise StageFailedError(stage.value, key, exc) from exc

        entry = ArtifactEntry(
            key=key,
            stage=stage,
            paths=paths,
            config_hash=digest,
            seed=seed,
            upstream=list(upstream),
        )
        self._manifest.add(entry)
        self._write_manifest()
        return entry

    # -- run ----------------------------------------------------------------

    def run(
        self, *, until: StageKind = StageKind.REPORT, resume: bool = True
    ) -> Manifest:
        """Execute every stage up to ``until`` and return the manifest.

        A failing item is recorded in the manifest before ``StageFailedError``
        is raised; items already finished stay listed. Entries of a previous
        run that the current spec no longer produces are dropped.
        """

        self._reconstructions = {}
        self._previous = self.load_manifest() if resume else None
        self._manifest = self._fresh_manifest()
        if self._previous is not None:
            planned = self.planned_keys()
            for key, entry in self._previous.entries.items():
                if key in planned:
                    self._manifest.add(entry.model_copy(deep=True))

        steps: list[tuple[StageKind, Callable[[], None]]] = [
            (StageKind.TRAIN, self._train_all),
            (StageKind.ATTACK, self._attack_all),
            (StageKind.METRICS, self._metrics_all),
        ]
        for stage, step in steps:
            if stage.order > until.order:
                break
            logger.info("Stage %s", stage.value)
            step()
        if until is StageKind.REPORT:
            self._report_into(self._manifest)
        self._write_manifest()
        return self._manifest

    def report(self, manifest: Manifest | None = None) -> ReportTables:
        """Build and persist the summary tables of a (possibly partial) run."""

        manifest = manifest or self.load_manifest()
        if manifest is None:
            raise ManifestError(f"No manifest at {self.store.describe(MANIFEST_KEY)}")
        self._previous = manifest
        self._manifest = manifest
        tables = self._report_into(manifest)
        self._write_manifest()
        return tables

    # -- data and models ----------------------------------------------------

    def _datasets(self) -> tuple[LabeledDataset, LabeledDataset]:
        if self._splits is None:
            self._splits = load_splits(self.spec.dataset, source=self._source)
        return self._splits

    def _model(self, model_id: str) -> Classifier:
        if model_id not in self._models:
            blob = self.store.read_bytes(f"models/{model_id}.pt")
            self._models[model_id] = load_checkpoint(blob).to(self.spec.device)
        return self._models[model_id]

    def _recipe(self, model_spec: ModelSpec) -> ModelRecipe:
        recipe = model_spec.resolve()
        train = recipe.train.model_copy(update={"seed": self.spec.seed})
        return recipe.model_copy(update={"train": train})

    # -- train --------------------------------------------------------------

    def _train_all(self) -> None:
        for model_spec in self.spec.models:
            self._train(model_spec)

    def _train(self, model_spec: ModelSpec) -> None:
        model_id = model_spec.model_id
        recipe = self._recipe(model_spec)
        snapshots = model_spec.snapshot_ids()
        digest = config_hash("train", self._dataset_hash, recipe, self.spec.seed)
        paths = [
            f"models/{model_id}.pt",
            f"models/{model_id}.metrics.jsonl",
            *(f"models/{sid}.pt" for sid in snapshots),
        ]
        self._item(
            StageKind.TRAIN,
            f"train/{model_id}",
            digest,
            partial(self._train_model, model_id, recipe, paths),
            seed=self.spec.seed,
            upstream=[self._dataset_hash],
        )
        self._model_hashes[model_id] = digest

        for sid, epoch in snapshots.items():
            snapshot_digest = config_hash("snapshot", epoch, digest)
            self._item(
                StageKind.TRAIN,
                f"train/{sid}",
                snapshot_digest,
                partial(self._existing, [f"models/{sid}.pt"]),
                seed=self.spec.seed,
                upstream=[digest],
            )
            self._model_hashes[sid] = snapshot_digest

    def _existing(self, paths: list[str]) -> list[str]:
        missing = [p for p in paths if not self.store.exists(p)]
        if missing:
            raise ManifestError(f"Expected artifacts were never written: {missing}")
        return paths

    def _train_model(
        self, model_id: str, recipe: ModelRecipe, paths: list[str]
    ) -> list[str]:
        train_set, shadow = self._datasets()
        model = build_model(
            recipe.architecture,
            self.spec.seed,
            model_id=model_id,
            regime=recipe.regime,
        ).to(self.spec.device)

        def save_snapshot(epoch: int, snapshot: Classifier) -> None:
            original = snapshot.metadata
            snapshot.metadata = original.model_copy(
                update={"model_id": f"{model_id}@{epoch}"}
            )
            try:
                self.store.write_bytes(
                    f"models/{model_id}@{epoch}.pt", encode_classifier(snapshot)
                )
            finally:
                snapshot.metadata = original

        if recipe.adversarial is not None:
            outcome = train_adversarial(
                model,
                train_set,
                recipe.train,
                recipe.adversarial,
                validation=shadow,
                on_checkpoint=save_snapshot,
            )
        else:
            outcome = train_standard(
                model,
                train_set,
                recipe.train,
                validation=shadow,
                on_checkpoint=save_snapshot,
            )
        self.store.write_bytes(paths[0], encode_classifier(outcome.model))
        self.store.write_bytes(paths[1], _jsonl(outcome.metrics))
        self._models[model_id] = outcome.model
        return self._existing(paths)

    # -- attack -------------------------------------------------------------

    def _attack_all(self) -> None:
        for attack in self.spec.attacks:
            cfg = attack.typed_config()
            attack_digest = config_hash(
                "attack", attack.kind, cfg, attack.seed_from_train
            )
            self._attack_hashes[attack.attack_id] = attack_digest
            for model_id in attack.model_ids:
                if isinstance(cfg, GanInversionConfig):
                    self._gan_attack(attack, cfg, attack_digest, model_id)
                else:
                    self._input_space_attack(attack, cfg, attack_digest, model_id)

    def _model_hash(self, model_id: str) -> str:
        try:
            return self._model_hashes[model_id]
        except KeyError:
            raise ManifestError(f"Model {model_id} has not been trained") from None

    def _record_reconstruction(
        self, attack: AttackSpec, model_id: str, entry: ArtifactEntry
    ) -> None:
        self._reconstructions.setdefault((attack.attack_id, model_id), []).append(entry)

    def _input_space_attack(
        self,
        attack: AttackSpec,
        cfg: PgdInversionConfig | DreamConfig,
        attack_digest: str,
        model_id: str,
    ) -> None:
        model_hash = self._model_hash(model_id)
        for class_id in attack.classes:
            for seed in attack.seeds:
                digest = config_hash(
                    attack_digest,
                    class_id,
                    seed,
                    model_hash,
                    self._dataset_hash if attack.seed_from_train else None,
                )
                run_cfg = cfg.model_copy(
                    update={"target_class": class_id, "seed": seed}
                )
                entry = self._item(
                    StageKind.ATTACK,
                    f"attack/{attack.attack_id}/{model_id}/c{class_id}/s{seed}",
                    digest,
                    partial(self._invert, attack, run_cfg, model_id),
                    seed=seed,
                    upstream=[model_hash],
                )
                self._record_reconstruction(attack, model_id, entry)

    def _seed_image(self, class_id: int, seed: int) -> ImageTensor:
        members = self._datasets()[0].of_class(class_id)
        if len(members) == 0:
            raise EmptyDatasetError(f"seeding class {class_id}")
        return members.image(seed % len(members))

    def _invert(
        self,
        attack: AttackSpec,
        cfg: PgdInversionConfig | DreamConfig,
        model_id: str,
    ) -> list[str]:
        model = self._model(model_id)
        seed_image = (
            self._seed_image(cfg.target_class, cfg.seed)
            if attack.seed_from_train
            else None
        )
        if isinstance(cfg, PgdInversionConfig):
            if seed_image is not None:
                result = invert_from_seed_image(
                    model, seed_image, cfg, attack_id=attack.attack_id
                )
            else:
                result = invert_class(model, cfg, attack_id=attack.attack_id)
        else:
            result = invert_class_multiscale(
                model, cfg, seed_image=seed_image, attack_id=attack.attack_id
            )
        return self._write_reconstruction(result)

    def _write_reconstruction(self, result: InversionResult) -> list[str]:
        name = image_filename(
            result.model_id, result.attack_id, result.target_class, result.seed
        )
        png = f"reconstructions/{result.attack_id}/{name}"
        stem = png.removesuffix(".png")
        self.store.write_bytes(png, encode_png(result.image))
        self.store.write_bytes(
            f"{stem}.json", result.record().model_dump_json(indent=2).encode()
        )
        paths = [png, f"{stem}.json"]
        for level, octave in enumerate(result.octave_images):
            paths.append(f"{stem}__octave{level}.png")
            self.store.write_bytes(paths[-1], encode_png(octave))
        return paths

    def _gan_key(self, attack: AttackSpec, model_id: str) -> str:
        return f"gan/{attack.attack_id}/{model_id}"

    def _gan_attack(
        self,
        attack: AttackSpec,
        cfg: GanInversionConfig,
        attack_digest: str,
        model_id: str,
    ) -> None:
        model_hash = self._model_hash(model_id)
        run_cfg = cfg.model_copy(update={"seed": self.spec.seed})
        key = self._gan_key(attack, model_id)
        gan_digest = config_hash(
            attack_digest, model_hash, self._dataset_hash, self.spec.seed
        )
        self._item(
            StageKind.ATTACK,
            key,
            gan_digest,
            partial(self._train_gan, attack, run_cfg, model_id),
            seed=self.spec.seed,
            upstream=[model_hash, self._dataset_hash],
        )
        for class_id in attack.classes:
            for seed in attack.seeds:
                entry = self._item(
                    StageKind.ATTACK,
                    f"attack/{attack.attack_id}/{model_id}/c{class_id}/s{seed}",
                    config_hash(gan_digest, class_id, seed),
                    partial(
                        self._sample_gan, attack, run_cfg, model_id, class_id, seed
                    ),
                    seed=seed,
                    upstream=[gan_digest],
                )
                self._record_reconstruction(attack, model_id, entry)

    def _train_gan(
        self, attack: AttackSpec, cfg: GanInversionConfig, model_id: str
    ) -> list[str]:
        _, shadow = self._datasets()
        key = self._gan_key(attack, model_id)
        paths = [f"{key}/generator.pt", f"{key}/losses.jsonl", f"{key}/samples.png"]
        grids: list[str] = []

        def save_progress(
            curve: list[GanEpochLosses], grid: ImageTensor | None
        ) -> None:
            self.store.write_bytes(paths[1], encode_loss_curve(curve))
            if grid is not None:
                grids.append(f"{key}/samples_epoch{curve[-1].epoch}.png")
                self.store.write_bytes(grids[-1], encode_png(grid))

        outcome = train_inversion_gan(
            self._model(model_id),
            shadow,
            cfg,
            run_id=f"{attack.attack_id}-{model_id}",
            on_epoch=save_progress,
        )
        self.store.write_bytes(paths[0], encode_generator(outcome.generator))
        grid = sample_grid(outcome.generator, cfg.samples_per_class, cfg.seed)
        self.store.write_bytes(paths[2], encode_png(grid))
        self._generators[key] = outcome.generator
        return [*paths, *grids]

    def _sample_gan(
        self,
        attack: AttackSpec,
        cfg: GanInversionConfig,
        model_id: str,
        class_id: int,
        seed: int,
    ) -> list[str]:
        key = self._gan_key(attack, model_id)
        if key not in self._generators:
            blob = self.store.read_bytes(f"{key}/generator.pt")
            self._generators[key] = load_generator(blob).to(self.spec.device)
        result = invert_class_gan(
            self._generators[key],
            self._model(model_id),
            class_id,
            cfg,
            seed=seed,
            attack_id=attack.attack_id,
        )
        return self._write_reconstruction(result)

    # -- metrics ------------------------------------------------------------

    def _metrics_all(self) -> None:
        suite = self.spec.metrics
        for model_id in self.spec.all_model_ids():
            model_hash = self._model_hash(model_id)
            self._item(
                StageKind.METRICS,
                f"accuracy/{model_id}",
                config_hash("accuracy", model_hash, self._dataset_hash),
                partial(self._accuracy, model_id),
                upstream=[model_hash],
            )
            if suite.radius:
                self._item(
                    StageKind.METRICS,
                    f"radius/{model_id}",
                    config_hash(
                        "radius",
                        model_hash,
                        self._dataset_hash,
                        suite.radius_config,
                        suite.radius_images,
                    ),
                    partial(self._radius, model_id),
                    upstream=[model_hash],
                )
        if not suite.similarity:
            return
        for (attack_id, model_id), entries in self._reconstructions.items():
            evaluators = sorted(
                pair.evaluator for pair in suite.cross_model if pair.source == model_id
            )
            upstream = [e.config_hash for e in entries]
            self._item(
                StageKind.METRICS,
                f"metrics/{attack_id}/{model_id}",
                config_hash(
                    "metrics",
                    upstream,
                    self._dataset_hash,
                    [self._model_hash(e) for e in evaluators],
                ),
                partial(self._privacy, attack_id, model_id, entries, evaluators),
                upstream=upstream,
            )

    def _accuracy(self, model_id: str) -> list[str]:
        train_set, shadow = self._datasets()
        model = self._model(model_id)
        artifact = AccuracyArtifact(
            model_id=model_id,
            train_accuracy=evaluate_accuracy(model, train_set),
            validation_accuracy=evaluate_accuracy(model, shadow),
        )
        path = f"metrics/accuracy__{model_id}.json"
        self.store.write_bytes(path, artifact.model_dump_json(indent=2).encode())
        return [path]

    def _radius(self, model_id: str) -> list[str]:
        _, shadow = self._datasets()
        count = min(self.spec.metrics.radius_images, len(shadow))
        index = torch.arange(count)
        report = adversarial_radius(
            self._model(model_id),
            shadow.batch(index),
            shadow.labels[index],
            self.spec.metrics.radius_config,
        )
        path = f"metrics/radius__{model_id}.json"
        self.store.write_bytes(path, report.model_dump_json(indent=2).encode())
        return [path]

    def _load_reconstruction(self, entry: ArtifactEntry) -> InversionResult:
        png, sidecar = entry.paths[:2]
        record = InversionRecord.model_validate_json(self.store.read_bytes(sidecar))
        return InversionResult(
            **record.model_dump(), image=load_image(self.store.read_bytes(png))
        )

    def _privacy(
        self,
        attack_id: str,
        model_id: str,
        entries: list[ArtifactEntry],
        evaluators: list[str],
    ) -> list[str]:
        train_set, _ = self._datasets()
        model = self._model(model_id)
        if model_id not in self._indexes:
            self._indexes[model_id] = FeatureIndex(model, train_set)
        results = [self._load_reconstruction(e) for e in entries]
        records = evaluate_reconstructions(
            model, results, train_set, index=self._indexes[model_id]
        )
        for record, result in zip(records, results, strict=True):
            for evaluator in evaluators:
                record.cross_activations[evaluator] = self._model(
                    evaluator
                ).class_activation(result.image, result.target_class)
        artifact = MetricsArtifact(
            attack_id=attack_id,
            model_id=model_id,
            attack_config_hash=self._attack_hashes[attack_id],
            records=records,
        )
        path = f"metrics/{attack_id}__{model_id}.json"
        self.store.write_bytes(path, artifact.model_dump_json(indent=2).encode())
        return [path]

    # -- report -------------------------------------------------------------

    def _report_into(self, manifest: Manifest) -> ReportTables:
        tables = build_report(manifest, self.store)
        upstream = [
            e.config_hash
            for e in manifest.entries.values()
            if e.stage is StageKind.METRICS
        ]

        def write() -> list[str]:
            blobs = (
                to_csv(tables.aggregates),
                to_csv(tables.tradeoff),
                to_csv(tables.records),
                tables.render().encode(),
            )
            for path, blob in zip(REPORT_PATHS, blobs, strict=True):
                self.store.write_bytes(path, blob)
            return list(REPORT_PATHS)

        self._item(
            StageKind.REPORT,
            "report",
            config_hash("report", upstream),
            write,
            upstream=upstream,
        )
        logger.info("Report:\n%s", tables.render())
        return tables


def run_experiment(
    spec: ExperimentSpec,
    store: ArtifactStore | None = None,
    *,
    source: DatasetSource | None = None,
    until: StageKind = StageKind.REPORT,
    resume: bool = True,
) -> Manifest:
    return Experiments(spec, store, source=source).run(until=until, resume=resume)
