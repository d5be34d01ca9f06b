from .builders import (
    INPUT_SHAPE,
    MODEL_BUILDERS,
    ModelSpec,
    build_model,
    build_pilotnet_modified,
    build_pilotnet_original,
)
from .checkpoint import (
    Checkpoint,
    CheckpointChecksumError,
    CheckpointError,
    CheckpointMagicError,
    CheckpointTruncatedError,
    load,
    save,
)
from .network import FeatureMapIndexError, ModelParams, Network
from .summary import ModelSummary, SummaryRow, parameter_reduction, summarize
