"""Audio <-> sound-feature-vector codec and unvoiced waveform synthesis.

Audio at 8 kHz is split into half-overlapping 40 ms frames (320 samples,
160 hop), each analysed into a gain plus eight line spectral frequencies.
Two successive analysis frames are concatenated into an 18-dimensional
feature vector per video frame.  Synthesis runs seeded Gaussian white
noise through the per-frame all-pole filters and blends the overlapping
frames with a triangular window.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .errors import DataError
from .lpc import ORDER, LpcFrame, LspFrame, lpc_analyze, lpc_to_lsp, lsp_to_lpc
from .wavio import AudioSignal, TARGET_RATE

FRAME_LEN = 320
HOP = 160
FEATURES_PER_FRAME = 2 * (ORDER + 1)
FEATURE_HEADER = ["g0"] + [f"w0{k}" for k in range(1, 9)] + ["g1"] + [f"w1{k}" for k in range(1, 9)]

STD_EPSILON = 1e-8
_FREQ_MARGIN = 0.001
_FREQ_MIN_GAP = 1e-4
_SYNTH_PEAK = 0.95


def frame_signal(signal: AudioSignal, frame_len: int, hop: int, target_count: int) -> np.ndarray:
    """Slice a signal into target_count frames, zero-padding the tail.

    Frame k covers samples [k*hop, k*hop + frame_len).
    """
    samples = signal.samples
    if len(samples) < frame_len:
        raise DataError("signal too short")
    needed = (target_count - 1) * hop + frame_len
    if len(samples) < needed:
        samples = np.concatenate([samples, np.zeros(needed - len(samples))])
    offsets = np.arange(target_count) * hop
    return np.stack([samples[o:o + frame_len] for o in offsets])


def encode_signal(signal: AudioSignal, video_frame_count: int) -> np.ndarray:
    """Encode audio into one 18-vector per video frame.

    Row i concatenates the (gain, freqs) of analysis frames 2i and 2i+1.
    """
    if signal.sample_rate != TARGET_RATE:
        raise DataError(f"encode_signal expects {TARGET_RATE} Hz audio")
    frames = frame_signal(signal, FRAME_LEN, HOP, 2 * video_frame_count)
    lsps = [lpc_to_lsp(lpc_analyze(fr)) for fr in frames]
    out = np.empty((video_frame_count, FEATURES_PER_FRAME))
    for i in range(video_frame_count):
        a, b = lsps[2 * i], lsps[2 * i + 1]
        out[i] = np.concatenate([[a.gain], a.freqs, [b.gain], b.freqs])
    return out


@dataclass
class Standardizer:
    """Element-wise zero-mean/unit-variance scaling fit on training features."""

    mean: np.ndarray
    std: np.ndarray

    def apply(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x) - self.mean) / self.std

    def invert(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x) * self.std + self.mean


def fit_standardizer(features: np.ndarray) -> Standardizer:
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] < 2:
        raise DataError("standardizer needs at least 2 feature vectors")
    std = features.std(axis=0)
    return Standardizer(mean=features.mean(axis=0), std=np.maximum(std, STD_EPSILON))


def sanitize_features(features: np.ndarray) -> np.ndarray:
    """Coerce unconstrained reals into valid codec features.

    Gains are clamped to >= 0.  Each 8-frequency group is sorted, clamped
    into (0.001, pi - 0.001) and forced to keep a minimum ascending gap.
    """
    out = np.array(features, dtype=np.float64)
    if out.ndim != 2 or out.shape[1] != FEATURES_PER_FRAME:
        raise DataError(f"features must be N x {FEATURES_PER_FRAME}")
    lo, hi = _FREQ_MARGIN, np.pi - _FREQ_MARGIN
    for gcol in (0, ORDER + 1):
        out[:, gcol] = np.maximum(out[:, gcol], 0.0)
        freqs = np.sort(out[:, gcol + 1:gcol + 1 + ORDER], axis=1)
        freqs = np.clip(freqs, lo, hi)
        for k in range(1, ORDER):
            freqs[:, k] = np.maximum(freqs[:, k], freqs[:, k - 1] + _FREQ_MIN_GAP)
        freqs[:, -1] = np.minimum(freqs[:, -1], hi)
        for k in range(ORDER - 2, -1, -1):
            freqs[:, k] = np.minimum(freqs[:, k], freqs[:, k + 1] - _FREQ_MIN_GAP)
        out[:, gcol + 1:gcol + 1 + ORDER] = freqs
    return out


def _feature_row_to_lsps(row: np.ndarray) -> tuple[LspFrame, LspFrame]:
    return (
        LspFrame(gain=float(row[0]), freqs=row[1:ORDER + 1]),
        LspFrame(gain=float(row[ORDER + 1]), freqs=row[ORDER + 2:]),
    )


def synthesize(features: np.ndarray, noise_seed: int) -> AudioSignal:
    """Generate an unvoiced waveform from a feature-vector sequence.

    Each 40 ms frame filters seeded Gaussian white noise through its
    all-pole filter scaled by the gain; filter state carries across
    frames and overlapping halves are blended by a triangular window.
    The result is peak-normalized to 0.95.
    """
    features = sanitize_features(features)
    if len(features) == 0:
        raise DataError("empty feature sequence")
    n_frames = 2 * len(features)
    total = (n_frames - 1) * HOP + FRAME_LEN
    rng = np.random.default_rng(noise_seed)
    noise = rng.standard_normal(total)
    window = np.concatenate([np.arange(HOP), np.arange(HOP, 0, -1)]) / HOP
    out = np.zeros(total)
    state = np.zeros(ORDER)
    for k in range(n_frames):
        lsp = _feature_row_to_lsps(features[k // 2])[k % 2]
        lpc = lsp_to_lpc(lsp)
        start = k * HOP
        excitation = lsp.gain * noise[start:start + FRAME_LEN]
        synth, state = lfilter([1.0], np.concatenate([[1.0], lpc.coeffs]), excitation, zi=state)
        out[start:start + FRAME_LEN] += window * synth
    peak = np.max(np.abs(out))
    if peak > 0.0:
        out *= _SYNTH_PEAK / peak
    return AudioSignal(out, TARGET_RATE)


def write_features_csv(path, features: np.ndarray) -> None:
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != FEATURES_PER_FRAME:
        raise DataError(f"features must be N x {FEATURES_PER_FRAME}")
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(FEATURE_HEADER)
        for row in features:
            writer.writerow([repr(float(v)) for v in row])


def read_features_csv(path) -> np.ndarray:
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty features file") from None
        if header != FEATURE_HEADER:
            raise DataError(f"{path}: bad features header")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != FEATURES_PER_FRAME:
                raise DataError(f"{path}:{lineno}: expected {FEATURES_PER_FRAME} columns")
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric value") from None
    if not rows:
        raise DataError(f"{path}: no feature rows")
    return np.array(rows, dtype=np.float64)
