"""Predictor analysis and line-spectral conversion tests."""

import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from v2s.errors import DataError
from v2s.lpc import (
    LpcFrame,
    LspFrame,
    autocorrelate,
    levinson_durbin,
    lpc_analyze,
    lpc_to_lsp,
    lsp_to_lpc,
)

from conftest import random_stable_lsp

UNIFORM_GRID = np.arange(1, 9) * np.pi / 9


def ar1_frame(seed, n=320, rho=0.9):
    rng = np.random.default_rng(seed)
    e = rng.standard_normal(n + 100)
    x = np.empty_like(e)
    x[0] = e[0]
    for i in range(1, len(e)):
        x[i] = rho * x[i - 1] + e[i]
    return x[100:]


def test_all_zero_frame_is_silence():
    out = lpc_analyze(np.zeros(320))
    npt.assert_array_equal(out.coeffs, np.zeros(8))
    assert out.gain == 0.0


def test_levinson_matches_direct_normal_equations():
    # independent oracle: solve the Toeplitz system directly
    rng = np.random.default_rng(3)
    for _ in range(20):
        x = rng.standard_normal(320)
        r = autocorrelate(x, 8)
        a, err = levinson_durbin(r, 8)
        R = np.array([[r[abs(i - j)] for j in range(8)] for i in range(8)])
        direct = np.linalg.solve(R, -r[1:9])
        npt.assert_allclose(a[1:], direct, atol=1e-8)
        assert err >= 0.0


def test_ar1_recovers_first_coefficient():
    coeffs = np.mean([lpc_analyze(ar1_frame(seed)).coeffs for seed in range(200)], axis=0)
    assert abs(coeffs[0] - (-0.9)) < 0.05
    assert np.max(np.abs(coeffs[1:])) < 0.05


def test_white_noise_near_flat_with_rms_gain():
    rng = np.random.default_rng(42)
    frame = 0.25 * rng.standard_normal(320)
    out = lpc_analyze(frame)
    assert np.max(np.abs(out.coeffs)) < 0.3
    rms = np.sqrt(np.mean(frame ** 2))
    assert abs(out.gain - rms) / rms < 0.2


def test_flat_spectrum_lsp_is_uniform_grid():
    out = lpc_to_lsp(LpcFrame(np.zeros(8), gain=0.7))
    npt.assert_allclose(out.freqs, UNIFORM_GRID, atol=1e-9)
    assert out.gain == 0.7


def test_uniform_grid_back_to_flat():
    out = lsp_to_lpc(LspFrame(gain=0.3, freqs=UNIFORM_GRID.copy()))
    npt.assert_allclose(out.coeffs, np.zeros(8), atol=1e-9)
    assert out.gain == 0.3


def test_single_pole_filter_against_root_oracle():
    # independent oracle: eigenvalue-based roots of the sum/difference
    # polynomials of A(z) = 1 - 0.9 z^-1
    a = np.array([-0.9, 0, 0, 0, 0, 0, 0, 0], dtype=float)
    out = lpc_to_lsp(LpcFrame(a, gain=1.0))
    assert np.all(np.diff(out.freqs) > 0)
    assert 0 < out.freqs[0] and out.freqs[-1] < np.pi

    full = np.concatenate([[1.0], a, [0.0]])
    p = full + full[::-1]
    q = full - full[::-1]
    angles = []
    for poly in (p, q):
        roots = np.roots(poly)
        ang = np.angle(roots)
        angles.extend(ang[(ang > 1e-9) & (ang < np.pi - 1e-9)])
    npt.assert_allclose(out.freqs, np.sort(angles), atol=1e-8)


def test_round_trip_many_random_filters():
    rng = np.random.default_rng(11)
    for _ in range(300):
        freqs = random_stable_lsp(rng)
        lpc = lsp_to_lpc(LspFrame(1.0, freqs))
        lsp2 = lpc_to_lsp(lpc)
        assert np.all(np.diff(lsp2.freqs) > 0)
        lpc2 = lsp_to_lpc(lsp2)
        npt.assert_allclose(lpc2.coeffs, lpc.coeffs, atol=1e-6)
        npt.assert_allclose(lsp2.freqs, freqs, atol=1e-8)


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=0, max_value=10 ** 9))
def test_interleaving_invariant_property(seed):
    freqs = random_stable_lsp(np.random.default_rng(seed))
    back = lpc_to_lsp(lsp_to_lpc(LspFrame(1.0, freqs)))
    diffs = np.diff(back.freqs)
    assert np.all(diffs > 0)
    assert back.freqs[0] > 0 and back.freqs[-1] < np.pi


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=10 ** 9),
       st.integers(min_value=0, max_value=10 ** 9))
def test_quantization_robustness(seed, pseed):
    # nudging each frequency by <= 0.001 rad (order preserved) must keep
    # the rebuilt filter minimum-phase, i.e. its LSPs stay ordered
    freqs = random_stable_lsp(np.random.default_rng(seed), min_gap=0.03)
    delta = np.random.default_rng(pseed).uniform(-0.001, 0.001, size=8)
    perturbed = freqs + delta
    assert np.all(np.diff(perturbed) > 0)
    rebuilt = lpc_to_lsp(lsp_to_lpc(LspFrame(1.0, perturbed)))
    assert np.all(np.diff(rebuilt.freqs) > 0)


def test_equal_freqs_rejected():
    freqs = UNIFORM_GRID.copy()
    freqs[3] = freqs[2]
    with pytest.raises(DataError, match="invalid LSP ordering"):
        lsp_to_lpc(LspFrame(1.0, freqs))


def test_out_of_range_freqs_rejected():
    freqs = UNIFORM_GRID.copy()
    freqs[0] = -0.1
    with pytest.raises(DataError, match="invalid LSP ordering"):
        lsp_to_lpc(LspFrame(1.0, freqs))


def test_unstable_filter_fails_root_isolation():
    with pytest.raises(DataError, match="LSP root isolation failed"):
        lpc_to_lsp(LpcFrame(np.array([-3.0, 0, 0, 0, 0, 0, 0, 0.5]), gain=1.0))
