"""Command-line pipeline: gen | split | train | predict | synth | sweep | eval.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
The V2S_THREADS environment variable caps sweep worker parallelism.
"""

from __future__ import annotations

import argparse
import itertools
import os
import sys

import numpy as np

from . import codec, pipeline, splits, synthdata, vision, wavio
from .errors import DataError, NumericError, UsageError
from .net import TrainConfig, load_model, parse_config_file, save_model, write_train_log
from .vision import CROPS, VALID_K


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _crop_for(name: str) -> vision.CropSpec:
    if name not in CROPS:
        raise UsageError(f"unknown crop region {name!r} (choose from {sorted(CROPS)})")
    return CROPS[name]


def _check_k(k: int) -> int:
    if k not in VALID_K:
        raise UsageError(f"K must be one of {VALID_K}")
    return k


def _load_config(path) -> TrainConfig:
    return parse_config_file(path) if path else TrainConfig()


def cmd_gen(args) -> int:
    if args.sequences < 10:
        raise UsageError("need >= 10 sequences")
    if os.path.isdir(args.out) and os.listdir(args.out) and not args.force:
        raise DataError(f"{args.out} exists and is not empty (use --force)")
    manifest = synthdata.generate_corpus(args.out, args.sequences, args.seed)
    print(manifest)
    return 0


def cmd_split(args) -> int:
    entries = vision.read_manifest(args.manifest)
    holdout = None
    if args.mode == splits.MODE_OOV:
        if not args.holdout:
            raise UsageError("--holdout d1,d2 required for oov_digits mode")
        try:
            a, b = args.holdout.split(",")
            holdout = (int(a), int(b))
        except ValueError:
            raise UsageError("--holdout must be two digits like 9,0") from None
    plan = splits.make_split(entries, args.mode, args.seed, holdout)
    splits.save_plan(args.out, plan)
    print(f"{args.out}: {len(plan.train_ids)} train / {len(plan.test_ids)} test")
    return 0


def cmd_train(args) -> int:
    entries = vision.read_manifest(args.manifest)
    plan = splits.load_plan(args.split)
    config = _load_config(args.config)
    params, history = pipeline.train_model(
        entries, plan, _check_k(args.k), _crop_for(args.crop), config
    )
    save_model(params, args.out)
    log_path = args.log or args.out + ".train_log.csv"
    write_train_log(log_path, history)
    print(args.out)
    print(log_path)
    return 0


def cmd_predict(args) -> int:
    params = load_model(args.model)
    if args.k != params.spec.in_channels:
        raise UsageError(
            f"K mismatch: model was trained with K={params.spec.in_channels}, got --k {args.k}"
        )
    if params.crop is None or args.crop != params.crop.region:
        stored = None if params.crop is None else params.crop.region
        raise UsageError(f"crop mismatch: model stores {stored!r}, got --crop {args.crop!r}")
    frames = vision.load_frames(args.frames)
    features = pipeline.predict_sequence(params, frames)
    codec.write_features_csv(args.out, features)
    print(args.out)
    return 0


def cmd_synth(args) -> int:
    features = codec.read_features_csv(args.features)
    signal = codec.synthesize(features, args.seed)
    wavio.write_wav(args.out, signal)
    print(args.out)
    return 0


def cmd_eval(args) -> int:
    params = load_model(args.model)
    entries = vision.read_manifest(args.manifest)
    plan = splits.load_plan(args.split)
    rows = pipeline.evaluate_model(params, entries, plan.test_ids)
    pipeline.write_metrics_csv(args.out, rows)
    print(args.out)
    return 0


def _parse_grid(grid: str):
    k_values, crop_values = None, None
    for part in grid.split(";"):
        key, _, value = part.partition("=")
        items = [v for v in value.split(",") if v]
        if key == "k":
            try:
                k_values = [_check_k(int(v)) for v in items]
            except ValueError:
                raise UsageError(f"bad k list {value!r}") from None
        elif key == "crop":
            crop_values = [_crop_for(v).region for v in items]
        else:
            raise UsageError(f"bad grid component {part!r}")
    if not k_values or not crop_values:
        raise UsageError('grid must look like "k=1,3;crop=full_face,mouth"')
    return k_values, crop_values


def _run_sweep_cell(cell_args) -> tuple[int, str, float]:
    """Train and score one (k, crop) grid cell; runs in-process or in a
    worker process, so everything arrives as plain paths and values."""
    manifest_path, plan_path, k, crop_region, config_path, cell_dir = cell_args
    entries = vision.read_manifest(manifest_path)
    plan = splits.load_plan(plan_path)
    config = _load_config(config_path)
    params, history = pipeline.train_model(entries, plan, k, CROPS[crop_region], config)
    os.makedirs(cell_dir, exist_ok=True)
    save_model(params, os.path.join(cell_dir, "model.v2sm"))
    write_train_log(os.path.join(cell_dir, "train_log.csv"), history)
    rows = pipeline.evaluate_model(params, entries, plan.test_ids)
    return k, crop_region, rows[0].std_mse


def cmd_sweep(args) -> int:
    entries = vision.read_manifest(args.manifest)
    k_values, crop_values = _parse_grid(args.grid)
    workdir = args.workdir or os.path.splitext(args.out)[0] + "_cells"
    os.makedirs(workdir, exist_ok=True)
    plan_path = os.path.join(workdir, "plan.txt")
    if args.split:
        plan = splits.load_plan(args.split)
    else:
        plan = splits.make_split(entries, splits.MODE_RANDOM, args.seed)
    splits.save_plan(plan_path, plan)

    cells = [
        (args.manifest, plan_path, k, crop, args.config,
         os.path.join(workdir, f"cell_k{k}_{crop}"))
        for k, crop in itertools.product(k_values, crop_values)
    ]
    threads = int(os.environ.get("V2S_THREADS", "1") or "1")
    if threads > 1 and len(cells) > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=min(threads, len(cells))) as pool:
            results = list(pool.map(_run_sweep_cell, cells))
    else:
        results = []
        for cell in cells:
            results.append(_run_sweep_cell(cell))
            print(f"cell k={cell[2]} crop={cell[3]} test_mse={results[-1][2]!r} "
                  f"plan={plan_path}")
    with open(args.out, "w") as f:
        f.write("k,crop,test_mse\n")
        for k, crop, mse in results:
            f.write(f"{k},{crop},{mse!r}\n")
    print(args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="v2s", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--sequences", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("split", help="make a train/test split plan")
    p.add_argument("--manifest", required=True)
    p.add_argument("--mode", choices=[splits.MODE_RANDOM, splits.MODE_OOV],
                   default=splits.MODE_RANDOM)
    p.add_argument("--holdout", help="two digits to hold out, e.g. 9,0")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("train", help="train a model on a split")
    p.add_argument("--manifest", required=True)
    p.add_argument("--split", required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--crop", default="full_face")
    p.add_argument("--config", help="key = value training config file")
    p.add_argument("--out", required=True)
    p.add_argument("--log", help="training log CSV path (default: <out>.train_log.csv)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict sound features for a frame dir")
    p.add_argument("--model", required=True)
    p.add_argument("--frames", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--crop", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("synth", help="synthesize a waveform from features")
    p.add_argument("--features", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("sweep", help="train/evaluate over a K x crop grid")
    p.add_argument("--manifest", required=True)
    p.add_argument("--grid", required=True)
    p.add_argument("--split", help="reuse an existing plan file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config")
    p.add_argument("--workdir")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("eval", help="score a model on a plan's test partition")
    p.add_argument("--model", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--split", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
