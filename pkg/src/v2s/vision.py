"""Frame ingestion: PGM files, cropping/scaling, and K-context clips.

Clips are stored channels-first as (K, 128, 128) float arrays so a batch
stacks directly into the network input layout.
"""

from __future__ import annotations

import csv
import os
import re
from dataclasses import dataclass

import numpy as np

from .errors import DataError

CLIP_SIZE = 128
VALID_K = (1, 3, 5, 7, 9)
PIXEL_MAX = 255.0

MANIFEST_NAME = "manifest.csv"
MANIFEST_HEADER = [
    "sequence_dir", "wav_path",
    "command", "color", "preposition", "letter", "digit", "adverb",
]

_FRAME_RE = re.compile(r"^frame_(\d{4})\.pgm$")


@dataclass(frozen=True)
class CropSpec:
    """Fractional crop rectangle (left, top, right, bottom) in [0, 1]."""

    region: str
    rect: tuple[float, float, float, float]

    def __post_init__(self):
        left, top, right, bottom = self.rect
        if not (0.0 <= left < right <= 1.0 and 0.0 <= top < bottom <= 1.0):
            raise DataError(f"invalid crop rect {self.rect}")


FULL_FACE_CROP = CropSpec("full_face", (0.0, 0.0, 1.0, 1.0))
MOUTH_CROP = CropSpec("mouth", (0.25, 0.55, 0.75, 0.9))
CROPS = {c.region: c for c in (FULL_FACE_CROP, MOUTH_CROP)}


@dataclass
class VideoClip:
    """Normalized (K, 128, 128) voxel block centered on one frame."""

    voxels: np.ndarray
    center_index: int
    k: int


def read_pgm(path) -> np.ndarray:
    """Read a binary P5 PGM with maxval 255 into a (H, W) uint8 array."""
    with open(path, "rb") as f:
        data = f.read()
    if not data.startswith(b"P5"):
        raise DataError(f"{path}: not a P5 PGM file")
    fields = []
    pos = 2
    while len(fields) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise DataError(f"{path}: malformed PGM header")
        fields.append(data[start:pos])
    pos += 1  # single whitespace after maxval
    try:
        width, height, maxval = (int(v) for v in fields)
    except ValueError:
        raise DataError(f"{path}: malformed PGM header") from None
    if width < 1 or height < 1 or maxval != 255:
        raise DataError(f"{path}: unsupported PGM (need maxval 255)")
    body = data[pos:pos + width * height]
    if len(body) != width * height:
        raise DataError(f"{path}: truncated PGM pixel data")
    return np.frombuffer(body, dtype=np.uint8).reshape(height, width)


def write_pgm(path, image: np.ndarray) -> None:
    image = np.asarray(image)
    if image.ndim != 2:
        raise DataError("PGM image must be 2-D")
    pixels = np.clip(np.round(image), 0, 255).astype(np.uint8)
    with open(path, "wb") as f:
        f.write(b"P5\n%d %d\n255\n" % (pixels.shape[1], pixels.shape[0]))
        f.write(pixels.tobytes())


def load_frames(dir_path) -> list[np.ndarray]:
    """Load frame_0000.pgm, frame_0001.pgm, ... from a directory in order."""
    indices = {}
    for name in os.listdir(dir_path):
        m = _FRAME_RE.match(name)
        if m:
            indices[int(m.group(1))] = name
    if not indices:
        raise DataError(f"{dir_path}: no frame_NNNN.pgm files")
    count = max(indices) + 1
    frames = []
    for i in range(count):
        if i not in indices:
            raise DataError(f"{dir_path}: missing frame index {i}")
        frames.append(read_pgm(os.path.join(dir_path, indices[i])))
    return frames


def crop_scale(frame: np.ndarray, crop: CropSpec) -> np.ndarray:
    """Bilinearly resample the crop region to 128 x 128.

    Sample positions align the rect corners with the output corners, so a
    full-frame rect on a 128 x 128 source is an exact identity.
    """
    frame = np.asarray(frame, dtype=np.float64)
    h, w = frame.shape
    left, top, right, bottom = crop.rect
    ys = top * (h - 1) + np.arange(CLIP_SIZE) * ((bottom - top) * (h - 1) / (CLIP_SIZE - 1))
    xs = left * (w - 1) + np.arange(CLIP_SIZE) * ((right - left) * (w - 1) / (CLIP_SIZE - 1))
    y0 = np.clip(np.floor(ys).astype(np.int64), 0, h - 1)
    x0 = np.clip(np.floor(xs).astype(np.int64), 0, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    tl = frame[np.ix_(y0, x0)]
    tr = frame[np.ix_(y0, x1)]
    bl = frame[np.ix_(y1, x0)]
    br = frame[np.ix_(y1, x1)]
    return (tl * (1 - fy) * (1 - fx) + tr * (1 - fy) * fx
            + bl * fy * (1 - fx) + br * fy * fx)


def clip_frame_indices(center: int, k: int, n_frames: int) -> list[int]:
    """Indices of the K-frame window around center, edge-replicated."""
    half = (k - 1) // 2
    return [min(max(j, 0), n_frames - 1) for j in range(center - half, center + half + 1)]


def normalize_clip(voxels: np.ndarray) -> np.ndarray:
    """Scale to [0, 1] by the format maximum and remove the scalar mean."""
    scaled = np.asarray(voxels, dtype=np.float64) / PIXEL_MAX
    return scaled - scaled.mean()


def assemble_clip(frames, center: int, k: int, crop: CropSpec) -> VideoClip:
    """Build the normalized K-context clip whose target is frame `center`."""
    if k not in VALID_K:
        raise DataError(f"K must be one of {VALID_K}")
    if not 0 <= center < len(frames):
        raise IndexError(f"center frame {center} out of range")
    stack = np.stack([crop_scale(frames[j], crop)
                      for j in clip_frame_indices(center, k, len(frames))])
    return VideoClip(voxels=normalize_clip(stack), center_index=center, k=k)


@dataclass(frozen=True)
class ManifestEntry:
    sequence_dir: str
    wav_path: str
    words: tuple[str, ...]

    @property
    def sequence_id(self) -> str:
        return self.sequence_dir.rstrip("/").split("/")[-1]

    @property
    def digit(self) -> int:
        return int(self.words[4])


def read_manifest(path) -> list[ManifestEntry]:
    """Read a dataset manifest; relative paths resolve against its directory."""
    base = os.path.dirname(os.path.abspath(path))
    entries = []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty manifest") from None
        if header != MANIFEST_HEADER:
            raise DataError(f"{path}: bad manifest header")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(MANIFEST_HEADER):
                raise DataError(f"{path}:{lineno}: expected {len(MANIFEST_HEADER)} columns")
            words = tuple(row[2:])
            if not words[4].isdigit() or not 0 <= int(words[4]) <= 9:
                raise DataError(f"{path}:{lineno}: digit slot must be 0..9")
            entries.append(ManifestEntry(
                sequence_dir=os.path.join(base, row[0]),
                wav_path=os.path.join(base, row[1]),
                words=words,
            ))
    if not entries:
        raise DataError(f"{path}: no manifest rows")
    return entries


def write_manifest(path, rows: list[tuple[str, str, tuple[str, ...]]]) -> None:
    """Write manifest rows of (sequence_dir, wav_path, six word slots)."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(MANIFEST_HEADER)
        for seq_dir, wav_path, words in rows:
            writer.writerow([seq_dir, wav_path, *words])
