import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from v2s import codec, synthdata, vision, wavio  # noqa: E402


@pytest.fixture(scope="session")
def mini_corpus(tmp_path_factory):
    """A 20-sequence corpus shared by pipeline-level tests."""
    root = tmp_path_factory.mktemp("corpus")
    manifest = synthdata.generate_corpus(root / "mini", 20, seed=1234)
    return manifest


def make_micro_corpus(root, n_seqs=12, n_frames=8, seed=0):
    """A miniature corpus with short sequences, for fast CLI-level tests."""
    os.makedirs(root, exist_ok=True)
    children = np.random.SeedSequence(seed).spawn(n_seqs)
    rows = []
    for s in range(n_seqs):
        rng = np.random.default_rng(children[s])
        digit = s % 10
        state = synthdata.make_trajectory(digit, rng, n_frames=n_frames)
        feats = synthdata.trajectory_features(state)
        audio = codec.synthesize(feats, int(rng.integers(2 ** 31)))
        texture = rng.normal(0.0, 4.0, size=(128, 128))
        seq = f"seq_{s:04d}"
        seq_dir = os.path.join(root, seq)
        os.makedirs(seq_dir, exist_ok=True)
        for i in range(n_frames):
            frame = synthdata.render_face(state.mouth_open[i], state.mouth_wide[i], texture)
            vision.write_pgm(os.path.join(seq_dir, f"frame_{i:04d}.pgm"), frame)
        wavio.write_wav(os.path.join(root, seq, "audio.wav"), audio)
        rows.append((seq, f"{seq}/audio.wav", synthdata._word_slots(digit, rng)))
    manifest = os.path.join(root, vision.MANIFEST_NAME)
    vision.write_manifest(manifest, rows)
    return manifest


@pytest.fixture(scope="session")
def micro_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("micro")
    return make_micro_corpus(root / "c", n_seqs=12, n_frames=8, seed=3)


def random_stable_lsp(rng: np.random.Generator, margin: float = 0.02,
                      min_gap: float = 0.02) -> np.ndarray:
    """Eight strictly ordered frequencies in (0, pi), away from the edges."""
    gaps = rng.uniform(min_gap, 1.0, size=9)
    w = np.cumsum(gaps)
    return w[:-1] / w[-1] * (np.pi - 2 * margin) + margin
