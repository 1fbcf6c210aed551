"""8th-order linear predictive analysis and line-spectral decomposition.

The predictor polynomial convention is A(z) = 1 + sum_k a_k z^-k, so an
AR(1) source x[n] = 0.9 x[n-1] + e[n] yields a_1 close to -0.9.  Line
spectral frequencies are the interleaved unit-circle root angles of the
sum and difference polynomials built from A(z); they are found with a
dense sign-change scan followed by bisection, with no dependence on a
polynomial eigensolver.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DataError

ORDER = 8
_SILENCE_R0 = 1e-13
_GRID_POINTS = 512
_BISECT_TOL = 1e-10


@dataclass
class LpcFrame:
    """Predictor coefficients a_1..a_8 of A(z) plus residual RMS gain."""

    coeffs: np.ndarray
    gain: float

    def is_silence(self) -> bool:
        return self.gain == 0.0 and not np.any(self.coeffs)


@dataclass
class LspFrame:
    """Gain plus eight strictly increasing angular frequencies in (0, pi)."""

    gain: float
    freqs: np.ndarray


@lru_cache(maxsize=8)
def _analysis_window(n: int) -> np.ndarray:
    """Hamming window scaled to unit mean-square so windowed energy
    matches frame energy and the residual gain tracks the frame RMS."""
    w = np.hamming(n)
    w /= np.sqrt(np.mean(w * w))
    w.flags.writeable = False
    return w


def autocorrelate(x: np.ndarray, max_lag: int) -> np.ndarray:
    n = len(x)
    return np.array([np.dot(x[lag:], x[: n - lag]) for lag in range(max_lag + 1)])


def levinson_durbin(r: np.ndarray, order: int) -> tuple[np.ndarray, float]:
    """Solve the Toeplitz normal equations for the given autocorrelation.

    Returns (a, error) where a = [1, a_1, ..., a_order] and error is the
    final prediction error energy.
    """
    a = np.zeros(order + 1)
    a[0] = 1.0
    err = float(r[0])
    for i in range(1, order + 1):
        if err <= 0.0:
            break
        acc = r[i] + np.dot(a[1:i], r[i - 1:0:-1])
        k = -acc / err
        a[1:i] += k * a[i - 1:0:-1]
        a[i] = k
        err *= 1.0 - k * k
    return a, max(err, 0.0)


def lpc_analyze(frame: np.ndarray) -> LpcFrame:
    """Fit an 8th-order predictor to one audio frame.

    An (effectively) all-zero frame maps to the silence convention:
    zero coefficients and zero gain.
    """
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim != 1 or len(frame) <= ORDER:
        raise DataError(f"analysis frame must be 1-D with more than {ORDER} samples")
    windowed = frame * _analysis_window(len(frame))
    r = autocorrelate(windowed, ORDER)
    if r[0] < _SILENCE_R0:
        return LpcFrame(np.zeros(ORDER), 0.0)
    a, err = levinson_durbin(r, ORDER)
    return LpcFrame(a[1:].copy(), float(np.sqrt(err / len(frame))))


def _half_coeffs(a_full: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric halves of the sum/difference polynomials of A(z).

    With p_k = a_k + a_{9-k} and q_k = a_k - a_{9-k} (a_0 = 1, a_9 = 0),
    the known roots at z = -1 (sum) and z = +1 (difference) are divided
    out, leaving two symmetric degree-8 polynomials returned as their
    first five coefficients.
    """
    ext = np.concatenate([a_full, [0.0]])
    p = ext + ext[::-1]
    q = ext - ext[::-1]
    p_red = np.empty(ORDER + 1)
    q_red = np.empty(ORDER + 1)
    p_red[0] = p[0]
    q_red[0] = q[0]
    for k in range(1, ORDER + 1):
        p_red[k] = p[k] - p_red[k - 1]
        q_red[k] = q[k] + q_red[k - 1]
    return p_red[: ORDER // 2 + 1], q_red[: ORDER // 2 + 1]


def _eval_half(half: np.ndarray, omega) -> np.ndarray:
    """Evaluate a symmetric polynomial's real spectrum at angles omega."""
    omega = np.atleast_1d(np.asarray(omega, dtype=np.float64))
    harmonics = np.arange(len(half) - 1, 0, -1)
    return np.cos(np.outer(omega, harmonics)) @ (2.0 * half[:-1]) + half[-1]


def _isolate_roots(half: np.ndarray) -> np.ndarray:
    """All roots of the half polynomial in (0, pi) via scan plus bisection."""
    nodes = np.linspace(0.0, np.pi, _GRID_POINTS + 2)
    values = _eval_half(half, nodes)
    exact = nodes[1:-1][values[1:-1] == 0.0]
    crossing = np.nonzero(values[:-1] * values[1:] < 0.0)[0]
    lo, hi = nodes[crossing], nodes[crossing + 1]
    flo = values[crossing]
    while np.any(hi - lo > _BISECT_TOL):
        mid = 0.5 * (lo + hi)
        fmid = _eval_half(half, mid)
        take_left = flo * fmid <= 0.0
        hi = np.where(take_left, mid, hi)
        lo = np.where(take_left, lo, mid)
        flo = np.where(take_left, flo, fmid)
    return np.sort(np.concatenate([exact, 0.5 * (lo + hi)]))


def lpc_to_lsp(lpc: LpcFrame) -> LspFrame:
    """Decompose a minimum-phase predictor into line spectral frequencies."""
    a_full = np.concatenate([[1.0], np.asarray(lpc.coeffs, dtype=np.float64)])
    if len(a_full) != ORDER + 1:
        raise DataError(f"expected {ORDER} predictor coefficients")
    p_half, q_half = _half_coeffs(a_full)
    p_roots = _isolate_roots(p_half)
    q_roots = _isolate_roots(q_half)
    if len(p_roots) != ORDER // 2 or len(q_roots) != ORDER // 2:
        raise DataError("LSP root isolation failed")
    freqs = np.empty(ORDER)
    freqs[0::2] = p_roots
    freqs[1::2] = q_roots
    if not np.all(np.diff(freqs) > 0.0):
        raise DataError("LSP root isolation failed")
    return LspFrame(gain=lpc.gain, freqs=freqs)


def _poly_from_angles(angles: np.ndarray) -> np.ndarray:
    """Expand prod_i (1 - 2 cos(w_i) z^-1 + z^-2) into coefficients."""
    poly = np.array([1.0])
    for w in angles:
        poly = np.convolve(poly, [1.0, -2.0 * np.cos(w), 1.0])
    return poly


def lsp_to_lpc(lsp: LspFrame) -> LpcFrame:
    """Rebuild the predictor polynomial from line spectral frequencies."""
    freqs = np.asarray(lsp.freqs, dtype=np.float64)
    if len(freqs) != ORDER:
        raise DataError(f"expected {ORDER} line spectral frequencies")
    if not (freqs[0] > 0.0 and freqs[-1] < np.pi and np.all(np.diff(freqs) > 0.0)):
        raise DataError("invalid LSP ordering")
    p_poly = np.convolve(_poly_from_angles(freqs[0::2]), [1.0, 1.0])
    q_poly = np.convolve(_poly_from_angles(freqs[1::2]), [1.0, -1.0])
    a_full = 0.5 * (p_poly + q_poly)
    return LpcFrame(coeffs=a_full[1:ORDER + 1], gain=lsp.gain)
