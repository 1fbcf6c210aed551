"""Synthetic corpus generator tests: rendering, mapping, determinism."""

import filecmp
import os

import numpy as np
import numpy.testing as npt
import pytest

from v2s import codec, synthdata, vision, wavio
from v2s.errors import DataError
from v2s.lpc import LpcFrame, LspFrame, lpc_to_lsp, lsp_to_lpc
from v2s.synthdata import (
    ArticulatoryState,
    articulation_to_filter,
    generate_corpus,
    make_trajectory,
    render_face,
    trajectory_features,
)
from v2s.vision import MOUTH_CROP


def mouth_rect_mean(img):
    left, top, right, bottom = MOUTH_CROP.rect
    h, w = img.shape
    return img[int(top * h):int(bottom * h), int(left * w):int(right * w)].mean()


def test_render_deterministic():
    a = render_face(0.3, 0.4)
    b = render_face(0.3, 0.4)
    npt.assert_array_equal(a, b)
    assert a.shape == (128, 128) and a.dtype == np.uint8


def test_render_mouth_intensity_tracks_opening():
    closed = render_face(0.0, 0.5)
    opened = render_face(1.0, 0.5)
    assert mouth_rect_mean(closed) - mouth_rect_mean(opened) > 30.0


def test_render_closed_mouth_is_small():
    img = render_face(0.0, 0.0).astype(float)
    dark = np.sum(img[70:115, 32:96] < 100)
    assert dark < 120  # only a sliver of mouth pixels when closed


def test_articulation_map_anchor_point():
    gain, freqs = articulation_to_filter(0.0, 0.0)
    assert gain == pytest.approx(0.05)
    assert freqs[0] == pytest.approx(0.2)
    assert freqs[1] == pytest.approx(0.5)


def test_articulation_map_always_ordered():
    for o in np.linspace(0, 1, 21):
        for w in np.linspace(0, 1, 21):
            gain, freqs = articulation_to_filter(o, w)
            assert gain >= 0.05
            assert np.all(np.diff(freqs) > 0)
            assert freqs[0] > 0 and freqs[-1] < np.pi


def test_articulation_filters_round_trip_through_codec():
    # full state square: the round trip must stay valid everywhere; extreme
    # states bunch the upper frequencies, which costs some root precision
    rng = np.random.default_rng(0)
    for _ in range(50):
        gain, freqs = articulation_to_filter(rng.uniform(0, 1), rng.uniform(0, 1))
        lsp = LspFrame(gain=gain, freqs=freqs)
        back = lpc_to_lsp(lsp_to_lpc(lsp))
        assert np.all(np.diff(back.freqs) > 0)
        npt.assert_allclose(back.freqs, freqs, atol=1e-3)
    # corpus-range states keep full precision
    for _ in range(50):
        gain, freqs = articulation_to_filter(rng.uniform(0, 0.42), rng.uniform(0, 0.26))
        back = lpc_to_lsp(lsp_to_lpc(LspFrame(gain=gain, freqs=freqs)))
        npt.assert_allclose(back.freqs, freqs, atol=1e-6)


def test_trajectories_stay_in_range_and_continuous():
    for digit in range(10):
        state = make_trajectory(digit, np.random.default_rng(digit))
        for track in (state.mouth_open, state.mouth_wide):
            assert np.all(track >= 0.0) and np.all(track <= 1.0)
            assert np.max(np.abs(np.diff(track))) <= 0.2


def test_trajectory_features_shape_and_alignment():
    state = make_trajectory(4, np.random.default_rng(1))
    feats = trajectory_features(state)
    assert feats.shape == (75, 18)
    g, f = articulation_to_filter(state.mouth_open[0], state.mouth_wide[0])
    npt.assert_allclose(feats[0, 0], g)
    npt.assert_allclose(feats[0, 1:9], f)


def test_corpus_requires_ten_sequences(tmp_path):
    with pytest.raises(DataError, match=">= 10"):
        generate_corpus(tmp_path / "c", 5, seed=0)


def test_corpus_regeneration_is_byte_identical(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    generate_corpus(a, 10, seed=42)
    generate_corpus(b, 10, seed=42)
    mismatches = []
    for root, _dirs, files in os.walk(a):
        rel = os.path.relpath(root, a)
        for name in files:
            pa = os.path.join(root, name)
            pb = os.path.join(b, rel, name)
            if not filecmp.cmp(pa, pb, shallow=False):
                mismatches.append(pa)
    assert not mismatches


def test_corpus_labels_cover_digits_uniformly(mini_corpus):
    entries = vision.read_manifest(mini_corpus)
    digits = [e.digit for e in entries]
    assert sorted(set(digits)) == list(range(10))
    assert all(digits.count(d) == 2 for d in range(10))


def test_corpus_ground_truth_matches_reanalysis(mini_corpus):
    entries = vision.read_manifest(mini_corpus)
    freq_cols = np.r_[1:9, 10:18]
    for entry in entries[:6]:
        gt = codec.read_features_csv(os.path.join(entry.sequence_dir, "features.csv"))
        re = codec.encode_signal(wavio.read_wav(entry.wav_path), 75)
        high_gain = gt[:, 0] > 0.1
        err = np.abs(re[:, freq_cols] - gt[:, freq_cols])[high_gain]
        assert err.mean() < 0.05


def test_corpus_files_complete(mini_corpus):
    entries = vision.read_manifest(mini_corpus)
    assert len(entries) == 20
    frames = vision.load_frames(entries[0].sequence_dir)
    assert len(frames) == 75
    signal = wavio.read_wav(entries[0].wav_path)
    assert len(signal.samples) == 160 * (2 * 75 + 1)
    assert len(entries[0].words) == 6
