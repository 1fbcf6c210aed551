"""Mono 16-bit PCM WAV reading/writing with resampling to 8 kHz.

Readers accept 8, 16 and 44.1 kHz input; anything above 8 kHz is
anti-alias low-pass filtered and resampled down.  Writers always emit
8 kHz files.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import DataError

TARGET_RATE = 8000
SUPPORTED_RATES = (8000, 16000, 44100)

_PCM_TAG = 1
_INT16_FULL_SCALE = 32767.0


@dataclass
class AudioSignal:
    """A mono audio signal with amplitudes in [-1, 1]."""

    samples: np.ndarray
    sample_rate: int = TARGET_RATE

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if not np.all(np.isfinite(self.samples)):
            raise DataError("audio samples must be finite")


def _design_lowpass(cutoff_hz: float, rate: int, taps: int) -> np.ndarray:
    """Hamming-windowed sinc low-pass FIR, odd length, unit DC gain."""
    assert taps % 2 == 1
    n = np.arange(taps) - (taps - 1) / 2
    h = np.sinc(2.0 * cutoff_hz / rate * n) * np.hamming(taps)
    return h / h.sum()


def resample_to_8k(samples: np.ndarray, rate: int) -> np.ndarray:
    """Low-pass below the 4 kHz Nyquist of the target rate, then resample.

    Integer ratios reduce to plain decimation of the filtered signal;
    fractional ratios (44.1 kHz) use linear interpolation on it.
    """
    if rate == TARGET_RATE:
        return np.asarray(samples, dtype=np.float64)
    taps = int(round(100 * rate / 16000)) * 2 + 1
    h = _design_lowpass(3600.0, rate, taps)
    filtered = np.convolve(samples, h, mode="same")
    step = rate / TARGET_RATE
    out_len = int(len(samples) / step)
    positions = np.arange(out_len) * step
    left = np.floor(positions).astype(np.int64)
    right = np.minimum(left + 1, len(filtered) - 1)
    frac = positions - left
    return filtered[left] * (1.0 - frac) + filtered[right] * frac


def read_wav(path) -> AudioSignal:
    """Read a mono 16-bit PCM WAV file, resampled to 8 kHz."""
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < 12 or raw[0:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise DataError(f"{path}: malformed WAV header")

    fmt = None
    data = None
    pos = 12
    while pos + 8 <= len(raw):
        chunk_id = raw[pos:pos + 4]
        (chunk_len,) = struct.unpack_from("<I", raw, pos + 4)
        body = raw[pos + 8:pos + 8 + chunk_len]
        if len(body) < chunk_len:
            raise DataError(f"{path}: truncated WAV chunk {chunk_id!r}")
        if chunk_id == b"fmt ":
            if chunk_len < 16:
                raise DataError(f"{path}: malformed WAV header (fmt chunk)")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif chunk_id == b"data":
            data = body
        pos += 8 + chunk_len + (chunk_len & 1)

    if fmt is None or data is None:
        raise DataError(f"{path}: malformed WAV header (missing fmt/data)")
    tag, channels, rate, _byte_rate, _block_align, bits = fmt
    if tag != _PCM_TAG:
        raise DataError(f"{path}: unsupported WAV encoding (format tag {tag})")
    if channels != 1 or bits != 16:
        raise DataError(
            f"{path}: unsupported WAV encoding ({channels} ch, {bits}-bit; need mono 16-bit)"
        )
    if rate not in SUPPORTED_RATES:
        raise DataError(f"{path}: unsupported sample rate {rate}")

    ints = np.frombuffer(data[: len(data) // 2 * 2], dtype="<i2")
    samples = np.clip(ints.astype(np.float64) / _INT16_FULL_SCALE, -1.0, 1.0)
    return AudioSignal(resample_to_8k(samples, rate), TARGET_RATE)


def write_wav(path, signal: AudioSignal) -> None:
    """Write an AudioSignal as an 8 kHz mono 16-bit PCM WAV file."""
    if signal.sample_rate != TARGET_RATE:
        raise DataError(f"write_wav expects {TARGET_RATE} Hz, got {signal.sample_rate}")
    ints = np.round(np.clip(signal.samples, -1.0, 1.0) * _INT16_FULL_SCALE)
    payload = ints.astype("<i2").tobytes()
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF", 36 + len(payload), b"WAVE",
        b"fmt ", 16, _PCM_TAG, 1, TARGET_RATE, TARGET_RATE * 2, 2, 16,
        b"data", len(payload),
    )
    with open(path, "wb") as f:
        f.write(header)
        f.write(payload)
