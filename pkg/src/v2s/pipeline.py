"""End-to-end wiring: manifests -> datasets -> models -> metrics.

Targets always come from the audio track via the codec (never from any
ground-truth sidecar), and the feature standardizer is fit on the
training partition only.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import codec, vision, wavio
from .dataset import ClipDataset, SequenceSamples, crop_sequence
from .errors import DataError
from .net import TrainConfig, predict_features, train
from .net.model import TARGET_SCALE, ModelParams, default_network_spec
from .splits import SplitPlan
from .vision import CropSpec, ManifestEntry


@dataclass
class LoadedSequence:
    entry: ManifestEntry
    cropped: np.ndarray      # (n_frames, 128, 128) float32, 0..255
    raw_targets: np.ndarray  # (n_frames, 18) codec features of the audio


def load_sequence(entry: ManifestEntry, crop: CropSpec) -> LoadedSequence:
    frames = vision.load_frames(entry.sequence_dir)
    signal = wavio.read_wav(entry.wav_path)
    return LoadedSequence(
        entry=entry,
        cropped=crop_sequence(frames, crop),
        raw_targets=codec.encode_signal(signal, len(frames)),
    )


def _entries_by_id(entries: list[ManifestEntry]) -> dict[str, ManifestEntry]:
    return {e.sequence_id: e for e in entries}


def _select(entries: list[ManifestEntry], ids: list[str]) -> list[ManifestEntry]:
    by_id = _entries_by_id(entries)
    missing = [i for i in ids if i not in by_id]
    if missing:
        raise DataError(f"split references unknown sequences: {missing[:3]}")
    return [by_id[i] for i in ids]


def train_model(entries: list[ManifestEntry], plan: SplitPlan, k: int,
                crop: CropSpec, config: TrainConfig):
    """Train on the plan's training partition; returns (params, history)."""
    loaded = [load_sequence(e, crop) for e in _select(entries, plan.train_ids)]
    standardizer = codec.fit_standardizer(
        np.concatenate([s.raw_targets for s in loaded], axis=0)
    )
    sequences = [
        SequenceSamples(
            frames=s.cropped,
            targets=standardizer.apply(s.raw_targets) * TARGET_SCALE,
        )
        for s in loaded
    ]
    dataset = ClipDataset(sequences, k=k, val_fraction=config.val_fraction,
                          seed=config.seed, dtype=config.dtype)
    params, history = train(dataset, config)
    params.standardizer = standardizer
    params.target_scale = TARGET_SCALE
    params.crop = crop
    return params, history


def predict_sequence(params: ModelParams, frames) -> np.ndarray:
    """Predict raw features for every frame of one sequence."""
    if params.crop is None:
        raise DataError("model has no crop spec attached")
    cropped = crop_sequence(frames, params.crop)
    clips = sequence_clips(cropped, params.spec.in_channels, params.dtype)
    return predict_features(params, clips)


def sequence_clips(cropped: np.ndarray, k: int, dtype) -> np.ndarray:
    """All K-context normalized clips of one cropped sequence."""
    n = len(cropped)
    x = np.empty((n, k, vision.CLIP_SIZE, vision.CLIP_SIZE), dtype=np.dtype(dtype))
    for i in range(n):
        window = cropped[vision.clip_frame_indices(i, k, n)].astype(np.dtype(dtype))
        window /= 255.0
        x[i] = window - window.mean()
    return x


_FREQ_COLS = np.r_[1:9, 10:18]
_GAIN_COLS = np.array([0, 9])


@dataclass
class EvalMetrics:
    scope: str
    n_frames: int
    std_mse: float
    baseline_std_mse: float
    freq_mae_rad: float
    gain_mae: float


def evaluate_model(params: ModelParams, entries: list[ManifestEntry],
                   test_ids: list[str]) -> list[EvalMetrics]:
    """Standardized MSE and raw-feature errors over a test partition.

    Returns an "all" row followed by one row per digit present, ordered.
    The baseline column is the mean-predictor MSE in standardized units.
    """
    if params.standardizer is None or params.crop is None:
        raise DataError("model lacks standardizer/crop metadata")
    std = params.standardizer
    groups: dict[str, list[np.ndarray]] = {}
    for entry in _select(entries, test_ids):
        seq = load_sequence(entry, params.crop)
        clips = sequence_clips(seq.cropped, params.spec.in_channels, params.dtype)
        raw_pred = predict_features(params, clips)
        std_pred = std.apply(raw_pred)
        std_target = std.apply(seq.raw_targets)
        per_frame = np.column_stack([
            np.mean((std_pred - std_target) ** 2, axis=1),
            np.mean(std_target ** 2, axis=1),
            np.mean(np.abs(raw_pred[:, _FREQ_COLS] - seq.raw_targets[:, _FREQ_COLS]), axis=1),
            np.mean(np.abs(raw_pred[:, _GAIN_COLS] - seq.raw_targets[:, _GAIN_COLS]), axis=1),
        ])
        groups.setdefault("all", []).append(per_frame)
        groups.setdefault(f"digit_{entry.digit}", []).append(per_frame)

    rows = []
    for scope in ["all"] + sorted(k for k in groups if k != "all"):
        stacked = np.concatenate(groups[scope], axis=0)
        means = stacked.mean(axis=0)
        rows.append(EvalMetrics(
            scope=scope, n_frames=len(stacked),
            std_mse=float(means[0]), baseline_std_mse=float(means[1]),
            freq_mae_rad=float(means[2]), gain_mae=float(means[3]),
        ))
    return rows


def write_metrics_csv(path, rows: list[EvalMetrics]) -> None:
    with open(path, "w") as f:
        f.write("scope,n_frames,std_mse,baseline_std_mse,freq_mae_rad,gain_mae\n")
        for r in rows:
            f.write(f"{r.scope},{r.n_frames},{r.std_mse!r},{r.baseline_std_mse!r},"
                    f"{r.freq_mae_rad!r},{r.gain_mae!r}\n")


def read_metrics_csv(path) -> list[EvalMetrics]:
    rows = []
    with open(path) as f:
        header = f.readline().strip()
        if header != "scope,n_frames,std_mse,baseline_std_mse,freq_mae_rad,gain_mae":
            raise DataError(f"{path}: bad metrics header")
        for line in f:
            parts = line.strip().split(",")
            if len(parts) != 6:
                raise DataError(f"{path}: bad metrics row")
            rows.append(EvalMetrics(parts[0], int(parts[1]), *(float(v) for v in parts[2:])))
    return rows
