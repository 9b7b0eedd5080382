import json

import pandas as pd
import pytest
import torch

from mirage.classifiers import load_checkpoint
from mirage.common.exceptions import ConfigError, ManifestError, StageFailedError
from mirage.common.types import AttackKind, TrainingRegime
from mirage.experiments import (
    AttackSpec,
    Experiments,
    InMemoryStore,
    Manifest,
    StageKind,
    run_experiment,
    service,
)
from mirage.experiments.service import REPORT_PATHS


def _fail(*args, **kwargs):
    raise AssertionError("should not be called on an up-to-date rerun")


def _boom(*args, **kwargs):
    raise RuntimeError("boom")


def _manifest(store: InMemoryStore) -> Manifest:
    return Manifest.model_validate_json(store.read_bytes("manifest.json"))


def test_should_produce_one_checkpoint_image_and_record_when_running_minimal_spec(
    source, make_spec
):
    store = InMemoryStore()

    manifest = run_experiment(make_spec(), store, source=source)

    assert manifest.complete
    assert store.keys("models/") == ["models/ttm.metrics.jsonl", "models/ttm.pt"]
    assert store.keys("reconstructions/") == [
        "reconstructions/pgd/ttm__pgd__c3__s0.json",
        "reconstructions/pgd/ttm__pgd__c3__s0.png",
    ]
    tables = Experiments(make_spec(), store, source=source).report()
    assert len(tables.records) == 1
    assert tables.records["target_class"].tolist() == [3]
    assert tables.aggregates["model_id"].tolist() == ["ttm"]
    for path in REPORT_PATHS:
        assert store.exists(path)


def test_should_list_only_existing_artifacts_when_matrix_run_completes(matrix_run):
    manifest = _manifest(matrix_run)

    listed = {path for entry in manifest.entries.values() for path in entry.paths}
    assert manifest.complete
    assert all(matrix_run.exists(path) for path in listed)
    assert set(matrix_run.keys()) - listed == {"manifest.json"}


def test_should_record_every_stage_item_when_matrix_run_completes(matrix_run):
    keys = set(_manifest(matrix_run).entries)

    assert {"train/ttm", "train/atm", "train/atm@1", "report"} <= keys
    assert {
        "attack/pgd/ttm/c0/s0",
        "attack/pgd/atm@1/c1/s0",
        "attack/pgd-seeded/ttm/c0/s0",
        "attack/deepdream/atm/c0/s0",
        "gan/gan/ttm",
        "attack/gan/ttm/c1/s0",
    } <= keys
    assert {f"accuracy/{m}" for m in ("ttm", "atm", "atm@1")} <= keys
    assert {f"radius/{m}" for m in ("ttm", "atm", "atm@1")} <= keys
    assert {
        "metrics/pgd/ttm",
        "metrics/pgd/atm",
        "metrics/pgd/atm@1",
        "metrics/pgd-seeded/ttm",
        "metrics/deepdream/atm",
        "metrics/gan/ttm",
    } <= keys


def test_should_store_snapshot_with_its_own_id_when_checkpoint_epoch_is_set(
    matrix_run,
):
    snapshot = load_checkpoint(matrix_run.read_bytes("models/atm@1.pt"))
    final = load_checkpoint(matrix_run.read_bytes("models/atm.pt"))

    assert snapshot.model_id == "atm@1"
    assert snapshot.metadata.epochs == 1
    assert snapshot.metadata.regime is TrainingRegime.ATM
    assert final.model_id == "atm"
    assert final.metadata.epochs == 2


def test_should_write_gan_artifacts_when_gan_attack_runs(matrix_run):
    assert matrix_run.keys("gan/gan/ttm/") == [
        "gan/gan/ttm/generator.pt",
        "gan/gan/ttm/losses.jsonl",
        "gan/gan/ttm/samples.png",
        "gan/gan/ttm/samples_epoch1.png",
    ]
    losses = matrix_run.read_bytes("gan/gan/ttm/losses.jsonl").decode().splitlines()
    assert len(losses) == 1
    entry = _manifest(matrix_run).entries["gan/gan/ttm"]
    assert "gan/gan/ttm/samples_epoch1.png" in entry.paths


def test_should_keep_octave_images_when_deepdream_requests_them(matrix_run):
    assert matrix_run.exists("reconstructions/deepdream/atm__deepdream__c0__s0.png")
    assert matrix_run.exists(
        "reconstructions/deepdream/atm__deepdream__c0__s0__octave0.png"
    )


def test_should_report_cross_model_activations_when_pair_is_configured(
    matrix, matrix_run
):
    tables = Experiments(matrix, matrix_run).report()

    atm_rows = tables.records[tables.records["model_id"] == "atm"]
    ttm_rows = tables.records[tables.records["model_id"] == "ttm"]
    assert atm_rows["activation_on_ttm"].notna().all()
    assert ttm_rows["activation_on_ttm"].isna().all()


def test_should_aggregate_one_row_per_attack_and_model_when_matrix_run_completes(
    matrix, matrix_run
):
    tables = Experiments(matrix, matrix_run).report()

    pairs = set(zip(tables.aggregates["attack_id"], tables.aggregates["model_id"]))
    assert pairs == {
        ("pgd", "ttm"),
        ("pgd", "atm@1"),
        ("pgd", "atm"),
        ("pgd-seeded", "ttm"),
        ("deepdream", "atm"),
        ("gan", "ttm"),
    }
    seeded = tables.aggregates[tables.aggregates["attack_id"] == "pgd-seeded"]
    assert seeded["mean_displacement_l2"].notna().all()
    curve = tables.tradeoff[tables.tradeoff["attack_id"] == "pgd"]
    assert sorted(curve["model_id"]) == ["atm", "atm@1", "ttm"]
    assert curve["adversarial_radius"].is_monotonic_increasing


def test_should_write_identical_manifest_when_rerunning_unchanged_spec(
    matrix, matrix_store, source, monkeypatch
):
    before = matrix_store.read_bytes("manifest.json")
    for name in (
        "train_standard",
        "train_adversarial",
        "invert_class",
        "invert_from_seed_image",
        "invert_class_multiscale",
        "train_inversion_gan",
        "adversarial_radius",
    ):
        monkeypatch.setattr(f"mirage.experiments.service.{name}", _fail)

    manifest = Experiments(matrix, matrix_store, source=source).run()

    assert manifest.complete
    assert matrix_store.read_bytes("manifest.json") == before


def test_should_rerun_only_affected_items_when_attack_config_changes(
    matrix, matrix_store, source, monkeypatch
):
    before = _manifest(matrix_store).entries
    for name in ("train_standard", "train_adversarial", "train_inversion_gan"):
        monkeypatch.setattr(f"mirage.experiments.service.{name}", _fail)
    spec = matrix
    attacks = [
        a.model_copy(update={"config": {"max_iterations": 4}})
        if a.attack_id == "pgd"
        else a
        for a in spec.attacks
    ]

    after = Experiments(
        spec.model_copy(update={"attacks": attacks}),
        matrix_store,
        source=source,
    ).run().entries

    changed = {k for k in before if before[k].config_hash != after[k].config_hash}
    assert "attack/pgd/ttm/c0/s0" in changed
    assert "metrics/pgd/atm" in changed
    assert "report" in changed
    assert not any(k.startswith(("train/", "gan/", "radius/")) for k in changed)
    assert "attack/pgd-seeded/ttm/c0/s0" not in changed
    assert "metrics/deepdream/atm" not in changed


def test_should_drop_stale_entries_when_attack_is_removed_from_spec(
    source, make_spec
):
    spec = make_spec()
    (pgd,) = spec.attacks
    both = spec.model_copy(
        update={"attacks": [pgd, pgd.model_copy(update={"attack_id": "pgd2"})]}
    )
    store = InMemoryStore()
    Experiments(both, store, source=source).run()
    assert "metrics/pgd2/ttm" in _manifest(store).entries

    experiments = Experiments(spec, store, source=source)
    manifest = experiments.run()
    tables = experiments.report()

    assert not any("pgd2" in key for key in manifest.entries)
    assert not any("pgd2" in key for key in _manifest(store).entries)
    assert set(manifest.entries) == experiments.planned_keys()
    assert tables.aggregates["attack_id"].tolist() == ["pgd"]
    assert set(tables.records["attack_id"]) == {"pgd"}


def test_should_retrain_when_resume_is_disabled(source, make_spec, monkeypatch):
    calls = []
    original = service.train_standard

    def counting(*args, **kwargs):
        calls.append(1)
        return original(*args, **kwargs)

    monkeypatch.setattr("mirage.experiments.service.train_standard", counting)
    store = InMemoryStore()
    Experiments(make_spec(), store, source=source).run(until=StageKind.TRAIN)
    Experiments(make_spec(), store, source=source).run(until=StageKind.TRAIN)
    Experiments(make_spec(), store, source=source).run(
        until=StageKind.TRAIN, resume=False
    )

    assert len(calls) == 2


def test_should_hash_identically_when_seed_is_unchanged(source, make_spec):
    first, second, other = InMemoryStore(), InMemoryStore(), InMemoryStore()

    Experiments(make_spec(), first, source=source).run(until=StageKind.TRAIN)
    Experiments(make_spec(), second, source=source).run(until=StageKind.TRAIN)
    Experiments(make_spec(seed=1), other, source=source).run(
        until=StageKind.TRAIN
    )

    assert first.read_bytes("manifest.json") == second.read_bytes("manifest.json")
    first_model = load_checkpoint(first.read_bytes("models/ttm.pt"))
    second_model = load_checkpoint(second.read_bytes("models/ttm.pt"))
    for a, b in zip(first_model.parameters(), second_model.parameters(), strict=True):
        assert torch.equal(a, b)
    assert (
        _manifest(first).entries["train/ttm"].config_hash
        != _manifest(other).entries["train/ttm"].config_hash
    )
    assert _manifest(other).seed == 1


def test_should_stop_after_train_stage_when_until_is_train(source, make_spec):
    store = InMemoryStore()

    manifest = Experiments(make_spec(), store, source=source).run(
        until=StageKind.TRAIN
    )

    assert list(manifest.entries) == ["train/ttm"]
    assert store.keys("reconstructions/") == []
    assert not store.exists("reports/summary.txt")


def test_should_mark_missing_values_when_reporting_partial_run(
    source, make_spec, make_metrics
):
    spec = make_spec(metrics=make_metrics(radius=False))
    store = InMemoryStore()
    experiments = Experiments(spec, store, source=source)
    experiments.run(until=StageKind.METRICS)

    tables = experiments.report()

    row = tables.aggregates.iloc[0]
    assert row["model_id"] == "ttm"
    assert pd.isna(row["adversarial_radius"])
    assert pd.isna(row["radius_censored"])
    assert tables.tradeoff.empty
    aggregates_csv = store.read_bytes("reports/aggregates.csv").decode()
    assert ",NA" in aggregates_csv
    rendered = tables.render()
    assert "NA" in rendered
    assert "None" not in rendered


def test_should_report_accuracy_only_when_no_attacks_ran(source, make_spec):
    store = InMemoryStore()
    spec = make_spec(attacks=[])
    Experiments(spec, store, source=source).run()

    tables = Experiments(spec, store).report()

    assert tables.aggregates["model_id"].tolist() == ["ttm"]
    assert tables.records.empty


def test_should_raise_manifest_error_when_reporting_without_manifest(make_spec):
    with pytest.raises(ManifestError):
        Experiments(make_spec(), InMemoryStore()).report()


def test_should_raise_manifest_error_when_manifest_is_corrupt(source, make_spec):
    store = InMemoryStore()
    store.write_bytes("manifest.json", b"{not json")

    with pytest.raises(ManifestError):
        Experiments(make_spec(), store, source=source).run()


def test_should_record_failure_and_keep_progress_when_attack_fails(
    source, make_spec, monkeypatch
):
    monkeypatch.setattr("mirage.experiments.service.invert_class", _boom)
    store = InMemoryStore()

    with pytest.raises(StageFailedError) as info:
        Experiments(make_spec(), store, source=source).run()

    assert info.value.key == "attack/pgd/ttm/c3/s0"
    manifest = _manifest(store)
    assert not manifest.complete
    assert manifest.failures[0].stage is StageKind.ATTACK
    assert "boom" in manifest.failures[0].error
    assert "train/ttm" in manifest.entries
    assert store.exists("models/ttm.pt")


def test_should_resume_after_failure_without_retraining_when_rerun(
    source, make_spec, monkeypatch
):
    store = InMemoryStore()
    with monkeypatch.context() as patch:
        patch.setattr("mirage.experiments.service.invert_class", _boom)
        with pytest.raises(StageFailedError):
            Experiments(make_spec(), store, source=source).run()
    monkeypatch.setattr("mirage.experiments.service.train_standard", _fail)

    manifest = Experiments(make_spec(), store, source=source).run()

    assert manifest.complete
    assert "attack/pgd/ttm/c3/s0" in manifest.entries


def test_should_raise_config_error_unwrapped_when_attack_config_is_unusable(
    source, make_spec
):
    dream = AttackSpec(
        attack_id="dream",
        kind=AttackKind.DEEPDREAM,
        config={"octaves": 3},
        model_ids=["ttm"],
        classes=[0],
    )
    store = InMemoryStore()

    with pytest.raises(ConfigError):
        Experiments(make_spec(attacks=[dream]), store, source=source).run()

    failures = _manifest(store).failures
    assert [f.key for f in failures] == ["attack/dream/ttm/c0/s0"]


def test_should_write_readable_sidecar_when_reconstruction_is_saved(source, make_spec):
    store = InMemoryStore()
    Experiments(make_spec(), store, source=source).run(until=StageKind.ATTACK)

    sidecar = json.loads(
        store.read_bytes("reconstructions/pgd/ttm__pgd__c3__s0.json")
    )

    assert sidecar["model_id"] == "ttm"
    assert sidecar["attack_id"] == "pgd"
    assert sidecar["target_class"] == 3

