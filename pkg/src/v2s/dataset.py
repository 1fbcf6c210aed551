"""Clip/target datasets feeding the training loop.

Frames are cropped once per sequence and cached; clips are assembled
lazily per batch (window, replicate edges, normalize) so a corpus of
thousands of samples never materializes all clips at once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .vision import CLIP_SIZE, CropSpec, clip_frame_indices, crop_scale

PIXEL_MAX = 255.0


class ArrayDataset:
    """In-memory (clips, targets) pairs; validation defaults to the
    training set itself, which suits overfitting smoke tests."""

    def __init__(self, clips: np.ndarray, targets: np.ndarray,
                 val_clips: np.ndarray | None = None,
                 val_targets: np.ndarray | None = None):
        if len(clips) != len(targets):
            raise DataError("clips/targets length mismatch")
        self.clips = clips
        self.targets = targets
        self.val_clips = clips if val_clips is None else val_clips
        self.val_targets = targets if val_targets is None else val_targets
        self.k = clips.shape[1]

    def train_count(self) -> int:
        return len(self.clips)

    def val_count(self) -> int:
        return len(self.val_clips)

    def train_batch(self, idx):
        return self.clips[idx], self.targets[idx]

    def val_batch(self, idx):
        return self.val_clips[idx], self.val_targets[idx]


@dataclass
class SequenceSamples:
    """One sequence's cropped frames (float32, 0..255) and its targets."""

    frames: np.ndarray   # (n_frames, 128, 128)
    targets: np.ndarray  # (n_frames, 18), already standardized and scaled


def crop_sequence(frames, crop: CropSpec) -> np.ndarray:
    """Apply crop_scale to every frame, cached as float32."""
    return np.stack([crop_scale(f, crop) for f in frames]).astype(np.float32)


class ClipDataset:
    """Lazy K-context clips over cropped sequences with a validation slice.

    The validation split is taken by whole sequences so neighbouring
    frames never straddle the train/val boundary.
    """

    def __init__(self, sequences: list[SequenceSamples], k: int,
                 val_fraction: float = 0.1, seed: int = 0, dtype="float32"):
        if not sequences:
            raise DataError("no sequences")
        self.sequences = sequences
        self.k = k
        self.dtype = np.dtype(dtype)
        n_val_seq = int(round(val_fraction * len(sequences)))
        if val_fraction > 0 and n_val_seq == 0:
            n_val_seq = 1 if len(sequences) > 1 else 0
        order = np.random.default_rng(seed).permutation(len(sequences))
        val_seqs = set(order[:n_val_seq].tolist())
        self._train_index = [(s, i) for s in range(len(sequences))
                             if s not in val_seqs
                             for i in range(len(sequences[s].frames))]
        self._val_index = [(s, i) for s in sorted(val_seqs)
                           for i in range(len(sequences[s].frames))]
        if not self._val_index:
            self._val_index = self._train_index

    def train_count(self) -> int:
        return len(self._train_index)

    def val_count(self) -> int:
        return len(self._val_index)

    def _assemble(self, pairs):
        x = np.empty((len(pairs), self.k, CLIP_SIZE, CLIP_SIZE), dtype=self.dtype)
        y = np.empty((len(pairs), self.sequences[0].targets.shape[1]), dtype=np.float64)
        for row, (s, i) in enumerate(pairs):
            seq = self.sequences[s]
            window = seq.frames[clip_frame_indices(i, self.k, len(seq.frames))]
            clip = window.astype(self.dtype) / PIXEL_MAX
            clip -= clip.mean()
            x[row] = clip
            y[row] = seq.targets[i]
        return x, y

    def train_batch(self, idx):
        return self._assemble([self._train_index[int(i)] for i in idx])

    def val_batch(self, idx):
        return self._assemble([self._val_index[int(i)] for i in idx])
