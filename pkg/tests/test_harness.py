import numpy as np
import pytest

from dualdrive.data import AugmentConfig, Dataset, EmptyDatasetError
from dualdrive.harness import (
    BenchReport,
    DataGenConfig,
    EvalReport,
    ReportDeserializeError,
    TrainConfig,
    TrainingHistory,
    bench,
    bench_dual_pipeline,
    constant_baseline,
    deserialize_report,
    evaluate_offline,
    generate_dataset,
    mirror_consistency,
    serialize_report,
    train,
)
from dualdrive.harness.report import (
    ScenarioResult,
    eval_report_lines,
    scenario_table_lines,
)
from dualdrive.models import Network, build_model, load


def small_config(**kwargs) -> TrainConfig:
    values = {
        "epochs": 2,
        "batch_size": 4,
        "steps_per_epoch": 2,
        "augment_enabled": False,
        "seed": 3,
    }
    values.update(kwargs)
    return TrainConfig(**values)


def test_zero_epochs_leave_model_unchanged(modified: Network, make_dataset):
    result = train(modified, make_dataset(4), small_config(epochs=0))
    assert result.history.loss == []
    for before, after in zip(modified.params, result.model.params):
        for name in before:
            np.testing.assert_array_equal(before[name], after[name])
    assert load(result.checkpoint).optimizer.t == 0


def test_training_is_deterministic(make_dataset):
    dataset = make_dataset(6)
    model = Network.initialize(build_model("modified"), seed=2)
    config = small_config(augment_enabled=True, augment=AugmentConfig(probability=1.0))
    first = train(model, dataset, config)
    second = train(model, dataset, config)
    assert first.checkpoint == second.checkpoint
    assert first.history == second.history


def test_prefetch_gives_same_batches(make_dataset):
    dataset = make_dataset(6)
    model = Network.initialize(build_model("modified"), seed=2)
    direct = train(model, dataset, small_config())
    prefetched = train(model, dataset, small_config(prefetch=True))
    assert direct.checkpoint == prefetched.checkpoint


def test_memorizes_one_sample(make_dataset):
    dataset = make_dataset(1, angles=[0.5])
    model = Network.initialize(build_model("modified"), seed=0)
    config = small_config(epochs=200, steps_per_epoch=1, learning_rate=1e-3)
    result = train(model, dataset, config)
    assert result.history.steps == 200
    assert result.history.loss[-1] < 0.01
    assert result.model.predict(dataset.frames[0]) == pytest.approx(0.5, abs=0.1)


def test_validation_history_and_checkpoints(make_dataset):
    model = Network.initialize(build_model("modified"), seed=0)
    written = []
    result = train(
        model,
        make_dataset(6),
        small_config(epochs=3, checkpoint_every=1),
        validation=make_dataset(3, seed=9),
        on_checkpoint=lambda epoch, data: written.append(epoch),
    )
    assert len(result.history.loss) == 3
    assert len(result.history.val_loss) == len(result.history.val_mae) == 3
    assert written == [1, 2, 3]
    assert [epoch for epoch, _ in result.checkpoints] == [1, 2, 3]
    assert load(result.checkpoint).optimizer.t == 6


def test_epochs_by_model():
    config = TrainConfig(epochs=5, epochs_by_model={"modified": 9})
    assert config.epochs_for("modified") == 9
    assert config.epochs_for("original") == 5


def test_train_rejects_empty_dataset(modified: Network):
    with pytest.raises(EmptyDatasetError):
        train(modified, Dataset.empty(), small_config())


def test_baselines(make_dataset):
    dataset = make_dataset(2, angles=[0.5, -0.5])
    baseline = constant_baseline(dataset)
    assert baseline.mse == pytest.approx(0.25)
    assert baseline.mae == pytest.approx(0.5)

    zero = Network.zeros(build_model("original"))
    assert evaluate_offline(zero, dataset) == pytest.approx(baseline)
    assert mirror_consistency(zero, dataset.frames) == 0.0


def test_generate_dataset():
    config = DataGenConfig(
        samples=5,
        tracks=["straight"],
        conditions=["day,sunny", "night,clear_sky"],
        stride=1,
    )
    dataset = generate_dataset(config)
    assert len(dataset) == 5
    assert dataset.frames.shape == (5, 120, 160, 1)
    assert np.all(np.abs(dataset.angles) <= 1.0)
    assert generate_dataset(config) == dataset


def test_generate_dataset_without_recovery_is_straight():
    config = DataGenConfig(
        samples=4, tracks=["straight"], conditions=["day,rain"], recovery_fraction=0.0
    )
    assert not generate_dataset(config).angles.any()


def test_generate_dataset_needs_tracks():
    with pytest.raises(ValueError):
        generate_dataset(DataGenConfig(tracks=[]))


def test_bench(original: Network, modified: Network):
    report = bench([original, modified], n_frames=3, warmup=1)
    assert report.frames == 3
    assert [entry.name for entry in report.models] == ["original", "modified"]
    assert report.models[0].params == 801419
    assert report.models[1].params == 303180
    assert report.models[1].macs < report.models[0].macs
    original_bytes, modified_bytes = (m.checkpoint_bytes for m in report.models)
    assert 0.36 <= modified_bytes / original_bytes <= 0.40
    assert report.latency_ratio is not None
    assert bench([modified], n_frames=2, warmup=0).latency_ratio is None


def test_bench_dual_pipeline(modified: Network):
    report = bench_dual_pipeline(modified, n_frames=4)
    assert report.frames == 4
    assert report.brake_decisions >= 1
    assert report.steering_fps > 0
    assert report.braking_fps > 0


def test_report_json():
    report = EvalReport(
        interventions=7,
        autonomy_percent=86,
        collisions=0,
        mean_abs_offset_m=0.12,
        ticks=2580,
    )
    text = serialize_report(report)
    assert set(deserialize_report(text, EvalReport).model_dump()) == {
        "interventions",
        "autonomy_percent",
        "collisions",
        "mean_abs_offset_m",
        "ticks",
    }
    assert deserialize_report(text, EvalReport) == report
    history_text = serialize_report(TrainingHistory(loss=[0.5]))
    assert deserialize_report(history_text, TrainingHistory).loss == [0.5]

    with pytest.raises(ReportDeserializeError):
        deserialize_report(text, BenchReport)
    with pytest.raises(ReportDeserializeError):
        deserialize_report("{not json", EvalReport)


def test_report_lines():
    report = EvalReport(
        interventions=0,
        autonomy_percent=100,
        collisions=0,
        mean_abs_offset_m=0.0,
        ticks=10,
    )
    plain = eval_report_lines(report, plain=True)
    assert "autonomy_percent: 100" in plain
    assert "interventions: 0" in plain
    colored = eval_report_lines(report)
    assert any("\x1b[" in line for line in colored)

    result = ScenarioResult(scenario="city-day-sunny", report=report)
    table = scenario_table_lines([result], plain=True)
    assert len(table) == 2
    assert table[1].startswith("city-day-sunny")
