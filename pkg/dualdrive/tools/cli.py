#!/usr/bin/env python
"""dualdrive command line: data generation, training, evaluation and benchmarks."""

import argparse
import enum
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

import colorama
import numpy as np
from pydantic import BaseModel

import dualdrive
from dualdrive.data import (
    balance,
    load_dataset,
    mirror_expand,
    save_dataset,
    split_fraction,
)
from dualdrive.harness import (
    ConstantDriver,
    ModelDriver,
    OracleDriver,
    ScenarioSpec,
    bench,
    bench_dual_pipeline,
    evaluate_offline,
    generate_dataset,
    get_scenario,
    run_closed_loop,
    run_table,
    serialize_report,
    train,
)
from dualdrive.harness.report import (
    eval_report_lines,
    report_lines,
    scenario_table_lines,
)
from dualdrive.models import MODEL_BUILDERS, Network, build_model, load, summarize
from dualdrive.models.summary import summary_lines
from dualdrive.project.config import PRESETS, DualDriveConfig, load_config, with_seed
from dualdrive.project.error import DualDriveException, InvalidConfigException
from dualdrive.project.logging import argparse_add_logging_args, argparse_parse_logging
from dualdrive.sim import SceneConditions, get_track, montage, render, write_pgm
from dualdrive.sim.vehicle import VehicleState

logger = logging.getLogger(__name__)

colorama.just_fix_windows_console()


class Subcommand(enum.Enum):
    GEN_DATA = "gen-data"
    BALANCE = "balance"
    TRAIN = "train"
    EVAL_OFFLINE = "eval-offline"
    DRIVE = "drive"
    BENCH = "bench"
    FEATURE_MAPS = "feature-maps"
    SUMMARY = "summary"


# Subcommands whose --out is the dataset or checkpoint, not the report.
ARTIFACT_SUBCOMMANDS = (Subcommand.GEN_DATA, Subcommand.BALANCE, Subcommand.TRAIN)


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--seed",
        type=int,
        metavar="<n>",
        help="Override every seed in the configuration",
    )
    common.add_argument(
        "--config",
        type=Path,
        metavar="<file>",
        help="Configuration file (key = value or YAML)",
    )
    common.add_argument(
        "--preset",
        choices=sorted(PRESETS),
        default="desk",
        help="Configuration preset (default: %(default)s)",
    )
    common.add_argument(
        "--out", type=Path, metavar="<path>", help="Where to write the result"
    )
    common.add_argument(
        "--json",
        action="store_true",
        help="Print the report as JSON instead of text",
    )
    common.add_argument(
        "--no-color", "-n", action="store_true", help="Do not color the output"
    )
    argparse_add_logging_args(common)
    return common


def _add_model_args(parser: argparse.ArgumentParser):
    parser.add_argument(
        "--model",
        choices=sorted(MODEL_BUILDERS),
        help="Architecture (freshly initialized)",
    )
    parser.add_argument(
        "--checkpoint",
        type=Path,
        metavar="<file>",
        help="DDMV1 checkpoint to load",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dualdrive", description="Dual-model driving stack", allow_abbrev=False
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {dualdrive.VERSION}"
    )
    subparsers = parser.add_subparsers(required=True, dest="command")
    common = _common_parser()

    def add(subcommand: Subcommand, help_text: str) -> argparse.ArgumentParser:
        sub = subparsers.add_parser(
            subcommand.value, parents=[common], help=help_text, allow_abbrev=False
        )
        sub.set_defaults(subcommand=subcommand)
        return sub

    gen = add(Subcommand.GEN_DATA, "Record oracle driving as a DDDS1 dataset")
    gen.add_argument("--samples", type=int, metavar="<n>", help="Number of samples")
    gen.add_argument("--tracks", nargs="+", metavar="<track>", help="Tracks to drive")
    gen.add_argument(
        "--conditions",
        nargs="+",
        metavar="<time,weather>",
        help="Conditions, e.g. day,sunny",
    )

    bal = add(
        Subcommand.BALANCE, "Balance the angle histogram and add mirrored samples"
    )
    bal.add_argument("--dataset", type=Path, required=True, metavar="<file>")
    bal.add_argument("--bins", type=int, metavar="<n>")
    bal.add_argument("--cap", type=int, metavar="<n>", help="Samples kept per bin")
    bal.add_argument(
        "--no-mirror", action="store_true", help="Skip the mirror expansion"
    )

    trn = add(Subcommand.TRAIN, "Train a network and write its checkpoint")
    _add_model_args(trn)
    trn.add_argument("--dataset", type=Path, required=True, metavar="<file>")
    trn.add_argument("--epochs", type=int, metavar="<n>")
    trn.add_argument("--history", type=Path, metavar="<file>", help="Loss history JSON")

    off = add(Subcommand.EVAL_OFFLINE, "MSE and MAE of a checkpoint on a dataset")
    off.add_argument("--checkpoint", type=Path, required=True, metavar="<file>")
    off.add_argument("--dataset", type=Path, required=True, metavar="<file>")

    drv = add(Subcommand.DRIVE, "Closed-loop driving session")
    drv.add_argument(
        "--driver", choices=("model", "oracle", "constant"), default="model"
    )
    drv.add_argument(
        "--checkpoint",
        type=Path,
        metavar="<file>",
        help="Checkpoint for the model driver",
    )
    drv.add_argument(
        "--angle", type=float, default=0.0, help="Steering of the constant driver"
    )
    drv.add_argument(
        "--scenario", metavar="<name>", help="Named scenario, e.g. stopped-lead"
    )
    drv.add_argument("--track", metavar="<name>")
    drv.add_argument("--conditions", metavar="<time,weather>")
    drv.add_argument("--duration", type=float, metavar="<seconds>")
    drv.add_argument(
        "--table", action="store_true", help="Run the whole evaluation catalogue"
    )
    drv.add_argument(
        "--no-brake", action="store_true", help="Disable the braking controller"
    )
    drv.add_argument(
        "--concurrent", action="store_true", help="Steering and braking on two threads"
    )

    bnc = add(
        Subcommand.BENCH, "Inference latency, parameters, MACs and checkpoint size"
    )
    bnc.add_argument(
        "--checkpoint",
        type=Path,
        nargs="+",
        metavar="<file>",
        help="Checkpoints to time",
    )
    bnc.add_argument("--frames", type=int, default=200, metavar="<n>")
    bnc.add_argument("--warmup", type=int, default=20, metavar="<n>")
    bnc.add_argument(
        "--dual-pipeline",
        action="store_true",
        help="Free-running steering and braking threads",
    )

    fmp = add(
        Subcommand.FEATURE_MAPS,
        "Dump activation maps of one convolutional layer as PGM",
    )
    _add_model_args(fmp)
    fmp.add_argument(
        "--layer",
        type=int,
        metavar="<index>",
        help="Layer index (default: second convolution)",
    )
    fmp.add_argument(
        "--conditions",
        nargs="+",
        metavar="<time,weather>",
        default=["day,sunny", "day,rain", "night,clear_sky"],
    )

    smr = add(Subcommand.SUMMARY, "Per-layer parameter table")
    smr.add_argument("--model", choices=sorted(MODEL_BUILDERS), required=True)

    return parser


def _print_report(
    args: argparse.Namespace, report: BaseModel, lines: list[str] | None = None
):
    if args.json:
        print(serialize_report(report))
    else:
        print("\n".join(lines if lines is not None else report_lines(report)))
    if args.out is not None and args.subcommand not in ARTIFACT_SUBCOMMANDS:
        args.out.write_text(serialize_report(report), encoding="utf-8")


def _network(
    parser: argparse.ArgumentParser, args: argparse.Namespace, seed: int
) -> Network:
    if args.checkpoint is not None:
        logger.debug("Loading checkpoint '%s'", args.checkpoint)
        return load(args.checkpoint.read_bytes()).model
    if args.model is None:
        parser.error("expected --model or --checkpoint")
    return Network.initialize(build_model(args.model), seed=seed)


def _require_out(parser: argparse.ArgumentParser, args: argparse.Namespace):
    if args.out is None:
        parser.error(f"{args.subcommand.value} needs --out")


def _gen_data(parser, args, config: DualDriveConfig) -> int:
    _require_out(parser, args)
    if args.samples is not None and args.samples <= 0:
        parser.error("--samples must be positive")
    for text in args.conditions or ():
        try:
            SceneConditions.parse(text)
        except ValueError as ex:
            parser.error(str(ex))
    overrides = {
        "samples": args.samples,
        "tracks": args.tracks,
        "conditions": args.conditions,
    }
    update = {key: value for key, value in overrides.items() if value is not None}
    dataset = generate_dataset(config.data.model_copy(update=update))
    save_dataset(dataset, args.out)
    logger.info("Wrote %d samples to '%s'", len(dataset), args.out)
    return 0


def _balance(parser, args, config: DualDriveConfig) -> int:
    _require_out(parser, args)
    if args.bins is not None and args.bins < 3:
        parser.error("--bins must be at least 3")
    if args.cap is not None and args.cap <= 0:
        parser.error("--cap must be positive")
    dataset = load_dataset(args.dataset)
    bins = args.bins or config.data.balance_bins
    cap = args.cap or config.data.balance_cap
    balanced = balance(dataset, bins=bins, cap_per_bin=cap, seed=config.data.seed)
    if not args.no_mirror:
        balanced = mirror_expand(balanced)
    save_dataset(balanced, args.out)
    logger.info("%d samples in, %d samples out", len(dataset), len(balanced))
    return 0


def _train(parser, args, config: DualDriveConfig) -> int:
    _require_out(parser, args)
    model = _network(parser, args, config.train.seed)
    train_config = config.train
    if args.epochs is not None:
        train_config = train_config.model_copy(
            update={"epochs": args.epochs, "epochs_by_model": {}}
        )

    dataset = load_dataset(args.dataset)
    train_set, test_set = split_fraction(
        dataset, train_config.test_fraction, train_config.seed
    )
    final_epoch = train_config.epochs_for(model.name)

    def write_checkpoint(epoch: int, data: bytes):
        if epoch == final_epoch:
            path = args.out
        else:
            path = args.out.with_suffix(f".e{epoch}.ddmv")
        path.write_bytes(data)
        logger.debug("Checkpoint for epoch %d written to '%s'", epoch, path)

    result = train(
        model,
        train_set,
        train_config,
        validation=test_set,
        on_checkpoint=write_checkpoint,
    )
    history_path = args.history or args.out.with_suffix(".history.json")
    history_path.write_text(serialize_report(result.history), encoding="utf-8")
    final_loss = result.history.loss[-1] if result.history.loss else "n/a"
    _print_report(args, result.history, [f"loss: {final_loss}"])
    return 0


def _eval_offline(parser, args, config: DualDriveConfig) -> int:
    model = load(args.checkpoint.read_bytes()).model
    metrics = evaluate_offline(model, load_dataset(args.dataset))
    print(f"mse: {metrics.mse}")
    print(f"mae: {metrics.mae}")
    if args.out is not None:
        text = json.dumps(metrics._asdict(), indent=2) + "\n"
        args.out.write_text(text, encoding="utf-8")
    return 0


def _scenario(parser, args, config: DualDriveConfig) -> ScenarioSpec:
    if args.scenario:
        scenario = get_scenario(args.scenario)
    else:
        scenario = config.scenario.model_copy(deep=True)
    if args.seed is not None:
        scenario.seed = args.seed
    if args.track is not None:
        get_track(args.track)
        scenario.track = args.track
    if args.conditions is not None:
        try:
            conditions = SceneConditions.parse(args.conditions, scenario.seed)
        except ValueError as ex:
            parser.error(str(ex))
        scenario.time, scenario.weather = conditions.time, conditions.weather
    if args.duration is not None:
        if args.duration <= 0:
            parser.error("--duration must be positive")
        scenario.duration_s = args.duration
    return scenario


def _drive(parser, args, config: DualDriveConfig) -> int:
    if args.driver == "model":
        if args.checkpoint is None:
            parser.error("the model driver needs --checkpoint")
        driver = ModelDriver(load(args.checkpoint.read_bytes()).model)
    elif args.driver == "oracle":
        driver = OracleDriver(params=config.vehicle)
    else:
        driver = ConstantDriver(args.angle)

    options = {
        "brake_enabled": not args.no_brake,
        "steer_config": config.steer,
        "brake_config": config.brake,
        "vehicle_params": config.vehicle,
        "concurrent": args.concurrent,
    }
    if args.table:
        results = run_table(
            driver, seed_offset=args.seed or 0, duration_s=args.duration, **options
        )
        for line in scenario_table_lines(results, plain=args.no_color):
            print(line)
        if args.out is not None:
            text = "[" + ",".join(r.model_dump_json() for r in results) + "]\n"
            args.out.write_text(text, encoding="utf-8")
        return 0

    report = run_closed_loop(driver, _scenario(parser, args, config), **options)
    _print_report(args, report, eval_report_lines(report, plain=args.no_color))
    return 0


def _bench(parser, args, config: DualDriveConfig) -> int:
    seed = config.train.seed
    if args.checkpoint:
        models = [load(path.read_bytes()).model for path in args.checkpoint]
    else:
        models = [
            Network.initialize(build_model(name), seed=seed)
            for name in ("original", "modified")
        ]

    if args.dual_pipeline:
        for model in models:
            report = bench_dual_pipeline(model, args.frames, seed, config.brake)
            _print_report(args, report)
        return 0

    report = bench(models, n_frames=args.frames, warmup=args.warmup, seed=seed)
    lines = []
    for entry in report.models:
        fields = entry.model_dump()
        del fields["name"]
        lines += [f"{entry.name}.{key}: {value}" for key, value in fields.items()]
    lines.append(f"latency_ratio: {report.latency_ratio}")
    _print_report(args, report, lines)
    return 0


def _feature_maps(parser, args, config: DualDriveConfig) -> int:
    _require_out(parser, args)
    model = _network(parser, args, config.train.seed)
    conv_layers = [i for i, layer in enumerate(model.spec.layers) if layer.is_conv]
    layer_index = args.layer if args.layer is not None else conv_layers[1]

    args.out.mkdir(parents=True, exist_ok=True)
    track = get_track(config.scenario.track)
    rng = np.random.default_rng(config.scenario.seed)
    state = VehicleState(s=float(rng.uniform(0, track.length)))
    for text in args.conditions:
        try:
            conditions = SceneConditions.parse(text, config.scenario.seed)
        except ValueError as ex:
            parser.error(str(ex))
        frame = render(track, state, conditions)
        maps = model.feature_maps(frame, layer_index)
        tag = conditions.label.replace(",", "-")
        write_pgm(args.out / f"frame_{tag}.pgm", frame)
        montage_path = args.out / f"{model.name}_layer{layer_index}_{tag}.pgm"
        write_pgm(montage_path, montage(maps))
        logger.info(
            "%s: %d maps of %dx%d", tag, maps.shape[0], maps.shape[2], maps.shape[1]
        )
    return 0


def _summary(parser, args, config: DualDriveConfig) -> int:
    summary = summarize(build_model(args.model))
    print("\n".join(summary_lines(summary)))
    if args.out is not None:
        fields = {
            "model": summary.name,
            "total": summary.total,
            "flatten": summary.flatten_length,
            "macs": summary.total_macs,
        }
        args.out.write_text(json.dumps(fields, indent=2) + "\n", encoding="utf-8")
    return 0


HANDLERS = {
    Subcommand.GEN_DATA: _gen_data,
    Subcommand.BALANCE: _balance,
    Subcommand.TRAIN: _train,
    Subcommand.EVAL_OFFLINE: _eval_offline,
    Subcommand.DRIVE: _drive,
    Subcommand.BENCH: _bench,
    Subcommand.FEATURE_MAPS: _feature_maps,
    Subcommand.SUMMARY: _summary,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(sys.argv[1:] if argv is None else list(argv))
    argparse_parse_logging(args)

    try:
        config = load_config(args.config, args.preset)
        if args.seed is not None:
            config = with_seed(config, args.seed)
        return HANDLERS[args.subcommand](parser, args, config)
    except InvalidConfigException as ex:
        logger.error("Invalid configuration: %s", ex)
    except FileNotFoundError as ex:
        logger.error("File not found: %s", ex.filename)
    # Checkpoint, dataset and data pipeline errors are all ValueErrors.
    except (DualDriveException, ValueError) as ex:
        logger.error("%s failed: %s", args.subcommand.value, ex)
    return 1


if __name__ == "__main__":
    raise SystemExit(main())
