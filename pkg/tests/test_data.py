import io

import numpy as np
import pytest
from pydantic import ValidationError

from dualdrive.data import (
    AugmentConfig,
    BatchProducer,
    Dataset,
    DatasetMagicError,
    DatasetTruncatedError,
    EmptyDatasetError,
    Sample,
    SplitSizeError,
    Transform,
    apply_transform,
    augment,
    balance,
    batch,
    load_dataset,
    mirror_expand,
    mirror_frames,
    read_dataset,
    save_dataset,
    split,
    split_fraction,
    steps_per_epoch,
    write_dataset,
)
from dualdrive.data.dataset import angle_bins
from dualdrive.data.dataset_file import dataset_from_bytes, dataset_to_bytes, file_size


class ForcedRng:
    """Stands in for a Generator and makes `augment` pick a given transform."""

    def __init__(self, draw: float, transform: int, factor: float = 1.0):
        self.draw = draw
        self.transform = transform
        self.factor = factor

    def random(self) -> float:
        return self.draw

    def integers(self, low: int, high: int | None = None) -> int:
        return self.transform

    def uniform(self, low: float, high: float) -> float:
        return self.factor


def gradient_frame() -> np.ndarray:
    return np.tile(np.arange(160, dtype=np.uint8), (120, 1))[:, :, np.newaxis]


def test_dataset_validation():
    with pytest.raises(ValueError):
        Dataset(np.zeros((2, 66, 200, 1), dtype=np.uint8), np.zeros(2))
    with pytest.raises(ValueError):
        Dataset(np.zeros((2, 120, 160, 1), dtype=np.uint8), np.zeros(3))
    with pytest.raises(ValueError):
        Dataset(np.zeros((1, 120, 160, 1), dtype=np.uint8), np.array([1.5]))


def test_dataset_is_read_only(make_dataset):
    dataset = make_dataset(4)
    with pytest.raises(ValueError):
        dataset.angles[0] = 0.0
    assert isinstance(dataset[0], Sample)
    assert len(list(dataset)) == 4


def test_empty_and_concat(make_dataset):
    assert len(Dataset.empty()) == 0
    joined = Dataset.concat([make_dataset(3, seed=1), make_dataset(2, seed=2)])
    assert len(joined) == 5


def test_angle_bins_edges():
    np.testing.assert_array_equal(angle_bins([-1.0, 0.0, 1.0], 25), [0, 12, 24])


def test_balance_caps_every_bin(make_dataset):
    angles = np.concatenate([np.zeros(50), np.full(5, 0.5), np.full(3, -0.9)])
    dataset = make_dataset(len(angles), angles=angles)
    balanced = balance(dataset, bins=25, cap_per_bin=10, seed=0)

    assert len(balanced) == 10 + 5 + 3
    counts = np.bincount(angle_bins(balanced.angles, 25), minlength=25)
    assert counts.max() <= 10
    assert balanced.provenance[-1] == "balanced"


def test_balance_is_deterministic(make_dataset):
    dataset = make_dataset(200, angles=np.zeros(200))
    first = balance(dataset, cap_per_bin=20, seed=5)
    assert balance(dataset, cap_per_bin=20, seed=5) == first


def test_balance_errors(make_dataset):
    with pytest.raises(ValueError):
        balance(make_dataset(3), bins=2)
    with pytest.raises(EmptyDatasetError):
        balance(Dataset.empty())


def test_mirror_frames_flips_width():
    frame = gradient_frame()
    mirrored = mirror_frames(frame)
    assert mirrored[0, 0, 0] == 159
    np.testing.assert_array_equal(mirror_frames(mirrored), frame)


def test_mirror_expand(make_dataset):
    dataset = make_dataset(3, angles=[0.0, 0.25, -1.0])
    expanded = mirror_expand(dataset)
    assert len(expanded) == 6
    np.testing.assert_array_equal(expanded.angles[3:], [0.0, -0.25, 1.0])
    assert not np.signbit(expanded.angles[3])
    np.testing.assert_array_equal(expanded.frames[4], mirror_frames(dataset.frames[1]))


def test_split_is_disjoint(make_dataset):
    dataset = make_dataset(20, angles=np.linspace(-1, 1, 20))
    train, test = split(dataset, 12, 5, seed=1)
    assert (len(train), len(test)) == (12, 5)
    assert not set(train.angles.tolist()) & set(test.angles.tolist())
    assert train.provenance[-1] == "train"


def test_split_errors(make_dataset):
    with pytest.raises(SplitSizeError):
        split(make_dataset(5), 4, 2)
    with pytest.raises(SplitSizeError):
        split_fraction(make_dataset(5), 1.0)


def test_split_fraction_counts(make_dataset):
    train, test = split_fraction(make_dataset(80), 0.1875)
    assert (len(train), len(test)) == (65, 15)


def test_augment_identity():
    sample = Sample(gradient_frame(), 0.3)
    assert augment(sample, ForcedRng(0.9, Transform.FLIP)) is sample


def test_augment_flip_negates_angle():
    out = augment(Sample(gradient_frame(), 0.3), ForcedRng(0.1, Transform.FLIP))
    assert out.angle == pytest.approx(-0.3)
    assert out.frame[0, 0, 0] == 159


def test_augment_brightness():
    frame = np.full((120, 160, 1), 200, dtype=np.uint8)
    out = augment(Sample(frame, 0.0), ForcedRng(0.1, Transform.BRIGHTNESS, 1.3))
    assert out.frame.dtype == np.uint8
    assert (out.frame == 255).all()
    darker = apply_transform(Sample(frame, 0.0), Transform.BRIGHTNESS, 0.5)
    assert (darker.frame == 100).all()


def test_augment_zoom_keeps_shape_and_angle():
    out = augment(Sample(gradient_frame(), -0.4), ForcedRng(0.1, Transform.ZOOM, 1.3))
    assert out.frame.shape == (120, 160, 1)
    assert out.angle == -0.4
    # Magnifying a ramp of slope 1 flattens it to about 1/1.3.
    rise = int(out.frame[60, 100, 0]) - int(out.frame[60, 60, 0])
    assert 28 <= rise <= 34


def test_augment_zoom_factor_one_is_identity():
    frame = gradient_frame()
    zoomed = apply_transform(Sample(frame, 0.0), Transform.ZOOM, 1.0)
    np.testing.assert_array_equal(zoomed.frame, frame)


@pytest.mark.parametrize(
    "field, value",
    [
        ("probability", 1.5),
        ("zoom_range", (0.8, 1.2)),
        ("brightness_range", (1.2, 0.9)),
    ],
)
def test_augment_config_validation(field: str, value):
    with pytest.raises(ValidationError):
        AugmentConfig(**{field: value})


def test_batch_shapes(make_dataset):
    frames, angles = batch(make_dataset(10), np.random.default_rng(0), batch_size=32)
    assert frames.shape == (32, 120, 160, 1)
    assert frames.dtype == np.uint8
    assert angles.shape == (32,)


def test_batch_is_deterministic(make_dataset):
    dataset = make_dataset(10)
    a = batch(dataset, np.random.default_rng(3), 8, AugmentConfig())
    b = batch(dataset, np.random.default_rng(3), 8, AugmentConfig())
    np.testing.assert_array_equal(a[0], b[0])
    np.testing.assert_array_equal(a[1], b[1])


def test_batch_errors(make_dataset):
    with pytest.raises(EmptyDatasetError):
        batch(Dataset.empty(), np.random.default_rng(0))
    with pytest.raises(ValueError):
        batch(make_dataset(2), np.random.default_rng(0), batch_size=0)


def test_steps_per_epoch():
    assert steps_per_epoch(65000, 300) == 217
    assert steps_per_epoch(300, 300) == 1
    assert steps_per_epoch(0, 300) == 1


def test_producer_matches_direct_batches(make_dataset):
    dataset = make_dataset(12)
    config = AugmentConfig()
    rng = np.random.default_rng(9)
    expected = [batch(dataset, rng, 4, config) for _ in range(5)]
    producer = BatchProducer(
        dataset, seed=9, count=5, batch_size=4, augment_config=config
    )
    with producer:
        produced = list(producer)
    assert len(produced) == 5
    for (f1, a1), (f2, a2) in zip(expected, produced):
        np.testing.assert_array_equal(f1, f2)
        np.testing.assert_array_equal(a1, a2)


def test_dataset_file_size(make_dataset):
    data = dataset_to_bytes(make_dataset(3))
    assert len(data) == file_size(3) == 9 + 3 * 19204
    assert data[:5] == b"DDDS1"


def test_dataset_file_round_trip(make_dataset, tmp_path):
    dataset = make_dataset(5)
    path = tmp_path / "set.ddds"
    save_dataset(dataset, path)
    assert load_dataset(path) == dataset

    stream = io.BytesIO()
    write_dataset(dataset, stream)
    stream.seek(0)
    assert read_dataset(stream) == dataset


def test_dataset_file_errors(make_dataset):
    data = dataset_to_bytes(make_dataset(2))
    with pytest.raises(DatasetMagicError):
        dataset_from_bytes(b"DDMV1" + data[5:])
    with pytest.raises(DatasetTruncatedError):
        dataset_from_bytes(data[:-1])
    assert len(dataset_from_bytes(dataset_to_bytes(Dataset.empty()))) == 0
