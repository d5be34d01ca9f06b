"""Random training batches and a background producer that prepares them ahead
of the optimizer."""

import logging
import queue
import threading

import numpy as np
import numpy.typing as npt

from .augment import AugmentConfig, augment
from .dataset import Dataset, EmptyDatasetError

logger = logging.getLogger(__name__)

DEFAULT_BATCH_SIZE = 300


def batch(
    dataset: Dataset,
    rng: np.random.Generator,
    batch_size: int = DEFAULT_BATCH_SIZE,
    augment_config: AugmentConfig | None = None,
) -> tuple[npt.NDArray[np.uint8], npt.NDArray[np.float32]]:
    """Draw `batch_size` samples uniformly with replacement, each passed through
    `augment`. Frames stay raw uint8; the network normalizes them. No
    augmentation when the config is None."""
    if len(dataset) == 0:
        raise EmptyDatasetError("Cannot draw a batch from an empty dataset")
    if batch_size < 1:
        raise ValueError(f"Batch size must be positive, got {batch_size}")

    picks = rng.integers(0, len(dataset), size=batch_size)
    frames = dataset.frames[picks].copy()
    angles = dataset.angles[picks].copy()
    if augment_config is None or augment_config.probability == 0.0:
        return frames, angles

    for row, index in enumerate(picks):
        sample = augment(dataset[int(index)], rng, augment_config)
        frames[row] = sample.frame
        angles[row] = sample.angle
    return frames, angles


def steps_per_epoch(dataset_size: int, batch_size: int = DEFAULT_BATCH_SIZE) -> int:
    """An epoch is ceil(size / batch_size) generator steps."""
    return max(1, -(-dataset_size // batch_size))


class BatchProducer:
    """Single producer thread filling a bounded queue with batches.

    The producer owns its generator, so the sequence of batches depends only on
    the seed and not on how fast the consumer is."""

    def __init__(
        self,
        dataset: Dataset,
        seed: int,
        count: int,
        batch_size: int = DEFAULT_BATCH_SIZE,
        augment_config: AugmentConfig | None = None,
        depth: int = 4,
    ) -> None:
        if len(dataset) == 0:
            raise EmptyDatasetError("Cannot draw a batch from an empty dataset")
        self._dataset = dataset
        self._rng = np.random.default_rng(seed)
        self._count = count
        self._batch_size = batch_size
        self._augment_config = augment_config
        self._queue: queue.Queue = queue.Queue(maxsize=depth)
        self._stop = threading.Event()
        self._thread = threading.Thread(
            target=self._run, name="batch-producer", daemon=True
        )
        self._thread.start()

    def _put(self, item) -> bool:
        while not self._stop.is_set():
            try:
                self._queue.put(item, timeout=0.1)
                return True
            except queue.Full:
                continue
        return False

    def _run(self):
        try:
            for _ in range(self._count):
                item = batch(
                    self._dataset, self._rng, self._batch_size, self._augment_config
                )
                if not self._put(item):
                    return
        except Exception as ex:  # pylint: disable=broad-exception-caught
            logger.error("Batch producer failed: %s", ex)
            self._put(ex)
            return
        self._put(None)

    def __iter__(self):
        return self

    def __next__(self) -> tuple[npt.NDArray[np.uint8], npt.NDArray[np.float32]]:
        item = self._queue.get()
        if item is None:
            raise StopIteration
        if isinstance(item, Exception):
            raise item
        return item

    def close(self):
        self._stop.set()
        self._thread.join()

    def __enter__(self) -> "BatchProducer":
        return self

    def __exit__(self, *exc):
        self.close()
