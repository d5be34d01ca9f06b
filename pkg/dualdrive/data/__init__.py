from .augment import AugmentConfig, Transform, apply_transform, augment
from .batch import DEFAULT_BATCH_SIZE, BatchProducer, batch, steps_per_epoch
from .dataset import (
    FRAME_SHAPE,
    Dataset,
    EmptyDatasetError,
    Sample,
    SplitSizeError,
    balance,
    mirror_expand,
    mirror_frames,
    split,
    split_fraction,
)
from .dataset_file import (
    DatasetFormatError,
    DatasetMagicError,
    DatasetTruncatedError,
    load_dataset,
    read_dataset,
    save_dataset,
    write_dataset,
)
