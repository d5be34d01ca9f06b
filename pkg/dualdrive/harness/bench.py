"""Inference latency, size and compute measurements of the steering networks."""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from itertools import islice
from typing import Sequence

import numpy as np

from dualdrive.control import BrakeConfig, Detection, brake_decision
from dualdrive.models import Network, save, summarize
from dualdrive.sim import (
    Camera,
    LeadVehicle,
    SceneConditions,
    get_track,
    render,
    truth_detections,
)
from .gen_data import oracle_drive
from .report import BenchReport, DualPipelineReport, ModelBench

logger = logging.getLogger(__name__)

BENCH_SPEED = 12.0


def bench_frames(
    n_frames: int, seed: int = 0, with_leads: bool = False
) -> list[np.ndarray]:
    """Frames from an oracle drive around the standard track, frozen against
    writes."""
    return [frame for frame, _ in bench_snapshots(n_frames, seed, with_leads)]


def bench_snapshots(
    n_frames: int, seed: int = 0, with_leads: bool = False
) -> list[tuple[np.ndarray, list[Detection]]]:
    """(frame, detections) pairs; with leads, a truck closes in and drops back
    periodically."""
    track = get_track("standard")
    conditions = SceneConditions(seed=seed)
    camera = Camera()
    rng = np.random.default_rng(seed)
    start = float(rng.uniform(0.0, track.length))

    snapshots = []
    states = islice(oracle_drive(track, BENCH_SPEED, start), n_frames)
    for i, state in enumerate(states):
        leads = [LeadVehicle(gap=4.0 + (i % 40))] if with_leads else []
        frame = render(track, state, conditions, leads, camera)
        frame.flags.writeable = False
        snapshots.append((frame, truth_detections(track, state, leads, camera)))
    return snapshots


def _time_model(
    model: Network, frames: Sequence[np.ndarray], warmup: int
) -> np.ndarray:
    for i in range(warmup):
        model.predict(frames[i % len(frames)])

    timings = np.empty(len(frames))
    for i, frame in enumerate(frames):
        start = time.perf_counter()
        model.predict(frame)
        timings[i] = time.perf_counter() - start
    return timings


def bench(
    models: Sequence[Network],
    n_frames: int = 200,
    warmup: int = 20,
    seed: int = 0,
    frames: Sequence[np.ndarray] | None = None,
) -> BenchReport:
    """Time single-frame prediction of every model on the same frames in this
    process. The latency ratio is modified over original when both are present."""
    if n_frames <= 0:
        raise ValueError(f"n_frames must be positive, got {n_frames}")
    if warmup < 0:
        raise ValueError(f"warmup must be non-negative, got {warmup}")
    if frames is None:
        frames = bench_frames(n_frames, seed)
    frames = list(frames)[:n_frames]

    entries = []
    for model in models:
        timings = _time_model(model, frames, warmup) * 1000.0
        summary = summarize(model.spec)
        entry = ModelBench(
            name=model.name,
            median_ms=float(np.median(timings)),
            p95_ms=float(np.percentile(timings, 95)),
            params=summary.total,
            macs=summary.total_macs,
            checkpoint_bytes=len(save(model, include_optimizer=True)),
        )
        logger.info(
            "%s: median %.2f ms, p95 %.2f ms",
            entry.name,
            entry.median_ms,
            entry.p95_ms,
        )
        entries.append(entry)

    by_name = {entry.name: entry for entry in entries}
    ratio = None
    if "original" in by_name and "modified" in by_name:
        ratio = by_name["modified"].median_ms / by_name["original"].median_ms

    return BenchReport(
        frames=len(frames), warmup=warmup, models=entries, latency_ratio=ratio
    )


def bench_dual_pipeline(
    model: Network,
    n_frames: int = 200,
    seed: int = 0,
    brake_config: BrakeConfig | None = None,
) -> DualPipelineReport:
    """Free-running steering and braking workers over the same read-only
    snapshots. Each worker reports its own throughput."""
    if n_frames <= 0:
        raise ValueError(f"n_frames must be positive, got {n_frames}")
    snapshots = bench_snapshots(n_frames, seed, with_leads=True)
    brake_config = brake_config or BrakeConfig()

    def steering_worker() -> float:
        start = time.perf_counter()
        for frame, _ in snapshots:
            model.predict(frame)
        return time.perf_counter() - start

    def braking_worker() -> tuple[float, int]:
        start = time.perf_counter()
        decisions = sum(
            1 for _, detections in snapshots if brake_decision(detections, brake_config)
        )
        return time.perf_counter() - start, decisions

    start = time.perf_counter()
    with ThreadPoolExecutor(max_workers=2, thread_name_prefix="pipeline") as executor:
        steering = executor.submit(steering_worker)
        braking = executor.submit(braking_worker)
        steering_seconds = steering.result()
        braking_seconds, decisions = braking.result()
    elapsed = time.perf_counter() - start

    return DualPipelineReport(
        frames=n_frames,
        seconds=elapsed,
        steering_fps=n_frames / max(steering_seconds, 1e-9),
        braking_fps=n_frames / max(braking_seconds, 1e-9),
        brake_decisions=decisions,
    )
