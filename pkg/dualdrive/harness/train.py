"""Mini-batch training with Adam on the MSE steering loss."""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from pydantic import AliasChoices, BaseModel, Field

from dualdrive.data import (
    AugmentConfig,
    BatchProducer,
    Dataset,
    EmptyDatasetError,
    batch,
    steps_per_epoch,
)
from dualdrive.models import Network, save
from dualdrive.nn import AdamState, adam_step, mse_grad, mse_loss
from .evaluate import evaluate_offline
from .report import TrainingHistory

logger = logging.getLogger(__name__)


class TrainingDivergedError(RuntimeError):
    """The training loss became NaN or infinite."""


class TrainConfig(BaseModel):
    epochs: int = Field(default=50, ge=0)
    # Per-model epoch counts overriding `epochs`; the full preset trains the
    # modified model longer.
    epochs_by_model: dict[str, int] = Field(
        default_factory=dict,
        validation_alias=AliasChoices("epochs-by-model", "epochs_by_model"),
    )
    batch_size: int = Field(
        default=300, ge=1, validation_alias=AliasChoices("batch-size", "batch_size")
    )
    steps_per_epoch: int | None = Field(
        default=None,
        ge=1,
        validation_alias=AliasChoices("steps-per-epoch", "steps_per_epoch"),
    )
    learning_rate: float = Field(
        default=1e-4,
        gt=0.0,
        validation_alias=AliasChoices("learning-rate", "learning_rate"),
    )
    beta1: float = Field(default=0.9, ge=0.0, lt=1.0)
    beta2: float = Field(default=0.999, ge=0.0, lt=1.0)
    epsilon: float = Field(default=1e-8, gt=0.0)
    augment: AugmentConfig = Field(default_factory=AugmentConfig)
    augment_enabled: bool = Field(
        default=True,
        validation_alias=AliasChoices("augment-enabled", "augment_enabled"),
    )
    test_fraction: float = Field(
        default=0.1875,
        ge=0.0,
        lt=1.0,
        validation_alias=AliasChoices("test-fraction", "test_fraction"),
    )
    seed: int = 0
    # Write a checkpoint every N epochs; 0 writes only the final one.
    checkpoint_every: int = Field(
        default=0,
        ge=0,
        validation_alias=AliasChoices("checkpoint-every", "checkpoint_every"),
    )
    prefetch: bool = False

    def epochs_for(self, model_name: str) -> int:
        return self.epochs_by_model.get(model_name, self.epochs)

    def new_optimizer(self) -> AdamState:
        return AdamState(
            lr=self.learning_rate,
            beta1=self.beta1,
            beta2=self.beta2,
            epsilon=self.epsilon,
        )


@dataclass
class TrainResult:
    model: Network
    optimizer: AdamState
    history: TrainingHistory
    checkpoint: bytes = b""
    checkpoints: list[tuple[int, bytes]] = field(default_factory=list)


def train(
    model: Network,
    dataset: Dataset,
    config: TrainConfig | None = None,
    validation: Dataset | None = None,
    on_checkpoint: Callable[[int, bytes], None] | None = None,
) -> TrainResult:
    """Train `model` on `dataset`. Deterministic for a given config seed.

    The input network is not modified; the trained one is returned together
    with its optimizer state, the loss history and the final checkpoint."""
    if config is None:
        config = TrainConfig()
    if len(dataset) == 0:
        raise EmptyDatasetError("Cannot train on an empty dataset")

    epochs = config.epochs_for(model.name)
    steps = config.steps_per_epoch or steps_per_epoch(len(dataset), config.batch_size)
    augment_config = config.augment if config.augment_enabled else None
    optimizer = config.new_optimizer()
    history = TrainingHistory()
    checkpoints: list[tuple[int, bytes]] = []

    rng = np.random.default_rng(config.seed)
    producer = None
    if config.prefetch and epochs > 0:
        producer = BatchProducer(
            dataset, config.seed, epochs * steps, config.batch_size, augment_config
        )

    logger.info(
        "Training %s: %d epochs of %d steps, batch %d",
        model.name,
        epochs,
        steps,
        config.batch_size,
    )
    try:
        for epoch in range(1, epochs + 1):
            losses = []
            for _ in range(steps):
                if producer is not None:
                    frames, targets = next(producer)
                else:
                    frames, targets = batch(
                        dataset, rng, config.batch_size, augment_config
                    )

                out, caches = model.forward(frames, keep_cache=True)
                targets = targets.astype(out.dtype)[:, np.newaxis]
                loss = mse_loss(out, targets)
                if not math.isfinite(loss):
                    raise TrainingDivergedError(
                        f"{model.name}: loss became {loss} in epoch {epoch}"
                    )

                grads = model.backward(mse_grad(out, targets), caches)
                params, optimizer = adam_step(model.params, grads, optimizer)
                model = model.with_params(params)
                losses.append(loss)

            history.loss.append(float(np.mean(losses)))
            history.steps += steps
            if validation is not None and len(validation) > 0:
                metrics = evaluate_offline(model, validation)
                history.val_loss.append(metrics.mse)
                history.val_mae.append(metrics.mae)
                logger.info(
                    "epoch %d: loss %.5f, val_loss %.5f, val_mae %.5f",
                    epoch,
                    history.loss[-1],
                    metrics.mse,
                    metrics.mae,
                )
            else:
                logger.info("epoch %d: loss %.5f", epoch, history.loss[-1])

            every = config.checkpoint_every
            if every and epoch % every == 0 and epoch != epochs:
                data = save(model, include_optimizer=True, optimizer=optimizer)
                checkpoints.append((epoch, data))
                if on_checkpoint is not None:
                    on_checkpoint(epoch, data)
    finally:
        if producer is not None:
            producer.close()

    final = save(model, include_optimizer=True, optimizer=optimizer)
    checkpoints.append((epochs, final))
    if on_checkpoint is not None:
        on_checkpoint(epochs, final)

    return TrainResult(
        model=model,
        optimizer=optimizer,
        history=history,
        checkpoint=final,
        checkpoints=checkpoints,
    )
