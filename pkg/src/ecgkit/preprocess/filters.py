"""Zero-phase IIR filtering for multi-lead arrays.

Filters are designed as second-order sections and run forward then backward
along the last axis. Edges are handled by even (mirror) reflection padding
long enough for the slowest pole to settle, with the initial filter state set
to the steady state of the padded window's mean level. Seeding from the mean
instead of the first sample keeps very low cutoffs (0.05 Hz) from turning
the arbitrary phase of the first sample into a slow baseline transient.
"""
from __future__ import annotations

import numpy as np
from scipy import signal

from ..exceptions import FrequencyAboveNyquist, InvalidBand

SETTLE_TOL = 1e-4


def settle_length(sos: np.ndarray, tol: float = SETTLE_TOL) -> int:
    """Samples until the slowest pole's impulse response decays below ``tol``."""
    radius = max(np.abs(np.roots(section[3:])).max() for section in sos)
    if radius <= 0:
        return 1
    if radius >= 1:
        raise ValueError("unstable filter")
    return int(np.ceil(np.log(tol) / np.log(radius)))


def pad_length(sos: np.ndarray, n: int) -> int:
    default = 3 * (2 * len(sos) + 1)
    return max(0, min(n - 1, max(default, settle_length(sos))))


def _steady_state(sos, data, padlen):
    zi = signal.sosfilt_zi(sos)
    level = data[..., : padlen + 1].mean(axis=-1)
    return zi.reshape(zi.shape[0], *([1] * (data.ndim - 1)), 2) * level[np.newaxis, ..., np.newaxis]


def sosfiltfilt_zero_phase(sos: np.ndarray, x: np.ndarray, padlen: int | None = None) -> np.ndarray:
    """Forward-backward filter ``x`` (..., L) with second-order sections ``sos``."""
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[-1]
    if padlen is None:
        padlen = pad_length(sos, n)
    padlen = min(padlen, n - 1)
    if padlen > 0:
        left = x[..., padlen:0:-1]
        right = x[..., -2: -padlen - 2: -1]
        ext = np.concatenate([left, x, right], axis=-1)
    else:
        ext = x
    y, _ = signal.sosfilt(sos, ext, axis=-1, zi=_steady_state(sos, ext, padlen))
    y = y[..., ::-1]
    y, _ = signal.sosfilt(sos, y, axis=-1, zi=_steady_state(sos, y, padlen))
    y = y[..., ::-1]
    return np.ascontiguousarray(y[..., padlen: padlen + n])


def notch_sos(f0: float, q: float, fs: float) -> np.ndarray:
    if not 0 < f0 < fs / 2:
        raise FrequencyAboveNyquist(f"notch at {f0} Hz needs 0 < f0 < fs/2 = {fs / 2} Hz")
    if q <= 0:
        raise ValueError("quality factor must be positive")
    b, a = signal.iirnotch(f0, q, fs=fs)
    return signal.tf2sos(b, a)


def butter_sos(order: int, cutoff, btype: str, fs: float) -> np.ndarray:
    nyq = fs / 2
    if btype == "bandpass":
        low, high = cutoff
        if not 0 < low < high < nyq:
            raise InvalidBand(f"need 0 < {low} < {high} < {nyq} Hz")
        wn = [low, high]
    else:
        if not 0 < cutoff < nyq:
            raise InvalidBand(f"need 0 < cutoff {cutoff} < {nyq} Hz")
        wn = cutoff
    if order < 1:
        raise InvalidBand("filter order must be >= 1")
    return signal.butter(order, wn, btype=btype, fs=fs, output="sos")
