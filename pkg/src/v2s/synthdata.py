"""Deterministic synthetic audiovisual corpus with exact ground truth.

Each sequence renders 75 frames of a stylized face whose mouth follows a
digit-specific articulation trajectory; the same trajectory drives a
known articulation-to-filter map, and the audio is synthesized from those
filters.  Ground-truth features are stored alongside, so the learned
video-to-sound mapping can be scored exactly.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import codec, vision, wavio
from .errors import DataError

N_FRAMES = 75
FRAME_SIZE = 128

_BACKGROUND = 25.0
_FACE_VALUE = 205.0
_EYE_VALUE = 35.0
_MOUTH_VALUE = 15.0
_TEXTURE_STD = 4.0
_SENSOR_NOISE_STD = 4.0

# articulation -> filter map constants
_F1_BASE, _F1_SPAN = 0.2, 1.8
_F2_OFFSET, _F2_SPAN = 0.3, 1.0
_GAIN_BASE, _GAIN_SPAN = 0.05, 0.5
_F2_CEIL = np.pi - 0.08

COMMANDS = ("bin", "lay", "place", "set")
COLORS = ("blue", "green", "red", "white")
PREPOSITIONS = ("at", "by", "in", "with")
LETTERS = tuple(c for c in "abcdefghijklmnopqrstuvxyz")
ADVERBS = ("again", "now", "please", "soon")

# per-digit trajectory templates: (base, amplitude, cycles, phase) for the
# mouth-open and mouth-wide channels.  Ranges keep the second resonance
# below ~1.5 rad, where codec re-analysis of the synthesized audio
# recovers the generating frequencies well inside the 0.05 rad budget.
_TEMPLATES = {
    0: ((0.22, 0.10, 1.6, 0.0), (0.13, 0.06, 1.8, 1.57)),
    1: ((0.14, 0.06, 3.2, 0.5), (0.17, 0.05, 1.5, 0.0)),
    2: ((0.28, 0.08, 2.4, 3.14), (0.09, 0.06, 3.0, 1.0)),
    3: ((0.22, 0.10, 4.0, 0.0), (0.13, 0.04, 0.8, 0.3)),
    4: ((0.16, 0.08, 1.0, 1.5), (0.15, 0.06, 2.6, 3.14)),
    5: ((0.26, 0.09, 1.7, 1.57), (0.08, 0.05, 1.4, 2.0)),
    6: ((0.19, 0.05, 4.5, 2.2), (0.17, 0.05, 1.0, 0.8)),
    7: ((0.30, 0.07, 0.9, 4.0), (0.12, 0.06, 2.2, 2.5)),
    8: ((0.17, 0.09, 2.8, 5.0), (0.15, 0.04, 3.6, 1.2)),
    9: ((0.24, 0.04, 3.4, 1.0), (0.10, 0.07, 2.5, 4.2)),
}

_CLIP_RANGES = ((0.02, 0.42), (0.02, 0.26))


@dataclass
class ArticulatoryState:
    """Per-frame mouth trajectories, both channels in [0, 1]."""

    mouth_open: np.ndarray
    mouth_wide: np.ndarray

    def __len__(self) -> int:
        return len(self.mouth_open)


def make_trajectory(digit: int, rng: np.random.Generator,
                    n_frames: int = N_FRAMES) -> ArticulatoryState:
    """A digit's characteristic trajectory with seeded per-sequence jitter."""
    if digit not in _TEMPLATES:
        raise DataError(f"unknown digit {digit}")
    t = np.arange(n_frames) / n_frames
    channels = []
    for (base, amp, cycles, phase), (lo, hi) in zip(_TEMPLATES[digit], _CLIP_RANGES):
        base_j = base + rng.uniform(-0.03, 0.03)
        amp_j = amp * rng.uniform(0.9, 1.1)
        phase_j = phase + rng.uniform(-0.3, 0.3)
        wobble = 0.02 * np.sin(2 * np.pi * rng.uniform(0.5, 2.0) * t + rng.uniform(0, 2 * np.pi))
        track = base_j + amp_j * np.sin(2 * np.pi * cycles * t + phase_j) + wobble
        channels.append(np.clip(track, lo, hi))
    return ArticulatoryState(mouth_open=channels[0], mouth_wide=channels[1])


def render_face(mouth_open: float, mouth_wide: float,
                texture: np.ndarray | None = None) -> np.ndarray:
    """Render one 128x128 grayscale face frame for a mouth state."""
    ys, xs = np.mgrid[0:FRAME_SIZE, 0:FRAME_SIZE].astype(np.float64)
    img = np.full((FRAME_SIZE, FRAME_SIZE), _BACKGROUND)

    def ellipse(cy, cx, ry, rx):
        return ((ys - cy) / ry) ** 2 + ((xs - cx) / rx) ** 2 <= 1.0

    img[ellipse(66, 64, 58, 48)] = _FACE_VALUE
    img[ellipse(44, 44, 5, 8)] = _EYE_VALUE
    img[ellipse(44, 84, 5, 8)] = _EYE_VALUE
    mouth_ry = 2.0 + 26.0 * mouth_open
    mouth_rx = 8.0 + 30.0 * mouth_wide
    img[ellipse(92, 64, mouth_ry, mouth_rx)] = _MOUTH_VALUE
    if texture is not None:
        img = img + texture
    return np.clip(np.round(img), 0, 255).astype(np.uint8)


def articulation_to_filter(mouth_open: float, mouth_wide: float):
    """Map one mouth state to a (gain, 8 ordered frequencies) filter.

    The first two resonances follow the articulation affinely; the rest
    spread uniformly up to pi, so ordering holds for any state in range.
    """
    w1 = _F1_BASE + _F1_SPAN * mouth_open
    w2 = w1 + _F2_OFFSET + _F2_SPAN * mouth_wide
    w2 = min(w2, _F2_CEIL)
    w1 = min(w1, w2 - 0.05)
    upper = np.pi - w2
    freqs = np.empty(8)
    freqs[0] = w1
    freqs[1] = w2
    freqs[2:] = w2 + np.arange(1, 7) * (upper / 7.0)
    gain = _GAIN_BASE + _GAIN_SPAN * mouth_open
    return gain, freqs


def trajectory_features(state: ArticulatoryState) -> np.ndarray:
    """Ground-truth 18-vector per frame: the filter at the frame instant
    concatenated with the filter half a frame later (interpolated)."""
    n = len(state)
    out = np.empty((n, codec.FEATURES_PER_FRAME))
    for i in range(n):
        o0, w0 = state.mouth_open[i], state.mouth_wide[i]
        j = min(i + 1, n - 1)
        o1 = 0.5 * (o0 + state.mouth_open[j])
        w1 = 0.5 * (w0 + state.mouth_wide[j])
        g_a, f_a = articulation_to_filter(o0, w0)
        g_b, f_b = articulation_to_filter(o1, w1)
        out[i] = np.concatenate([[g_a], f_a, [g_b], f_b])
    return out


def _word_slots(digit: int, rng: np.random.Generator) -> tuple[str, ...]:
    return (
        COMMANDS[rng.integers(len(COMMANDS))],
        COLORS[rng.integers(len(COLORS))],
        PREPOSITIONS[rng.integers(len(PREPOSITIONS))],
        LETTERS[rng.integers(len(LETTERS))],
        str(digit),
        ADVERBS[rng.integers(len(ADVERBS))],
    )


def generate_sequence(digit: int, seq_rng: np.random.Generator):
    """Build one sequence in memory: (frames, audio, ground truth, words)."""
    state = make_trajectory(digit, seq_rng)
    features = trajectory_features(state)
    noise_seed = int(seq_rng.integers(2 ** 31))
    audio = codec.synthesize(features, noise_seed)
    # a static per-sequence texture plus independent per-frame sensor noise,
    # which temporal context can average out but a single frame cannot
    texture = seq_rng.normal(0.0, _TEXTURE_STD, size=(FRAME_SIZE, FRAME_SIZE))
    frames = [
        render_face(
            state.mouth_open[i], state.mouth_wide[i],
            texture + seq_rng.normal(0.0, _SENSOR_NOISE_STD, size=(FRAME_SIZE, FRAME_SIZE)),
        )
        for i in range(len(state))
    ]
    words = _word_slots(digit, seq_rng)
    return frames, audio, features, words


def generate_corpus(out_dir, n_sequences: int, seed: int) -> str:
    """Write a corpus of sequences plus a manifest; fully seeded.

    Returns the manifest path.  Sequence s gets digit s % 10, so labels
    cover 0..9 uniformly whenever n_sequences is a multiple of 10.
    """
    if n_sequences < 10:
        raise DataError("need >= 10 sequences")
    os.makedirs(out_dir, exist_ok=True)
    children = np.random.SeedSequence(seed).spawn(n_sequences)
    manifest_rows = []
    for s in range(n_sequences):
        digit = s % 10
        frames, audio, features, words = generate_sequence(digit, np.random.default_rng(children[s]))
        seq_name = f"seq_{s:04d}"
        seq_dir = os.path.join(out_dir, seq_name)
        os.makedirs(seq_dir, exist_ok=True)
        for i, frame in enumerate(frames):
            vision.write_pgm(os.path.join(seq_dir, f"frame_{i:04d}.pgm"), frame)
        wav_rel = os.path.join(seq_name, "audio.wav")
        wavio.write_wav(os.path.join(out_dir, wav_rel), audio)
        codec.write_features_csv(os.path.join(seq_dir, "features.csv"), features)
        manifest_rows.append((seq_name, wav_rel, words))
    manifest_path = os.path.join(out_dir, vision.MANIFEST_NAME)
    vision.write_manifest(manifest_path, manifest_rows)
    return manifest_path
