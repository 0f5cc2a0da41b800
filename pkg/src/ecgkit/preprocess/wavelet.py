"""Daubechies-6 discrete wavelet transform and MAD soft-threshold denoising.

Boundary handling is half-sample symmetric extension; coefficient layout and
lengths follow the usual ``[cA_n, cD_n, ..., cD_1]`` convention, so results
can be compared one-to-one against other DWT libraries.
"""
from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..exceptions import SignalTooShort

# db6 analysis lowpass, 12 taps.
DB6_DEC_LO = np.array([
    -0.0010773010853084796,
    0.004777257510945511,
    0.0005538422011614961,
    -0.03158203931748603,
    0.027522865530305727,
    0.09750160558732304,
    -0.12976686756726194,
    -0.22626469396543983,
    0.31525035170919763,
    0.7511339080210954,
    0.49462389039845306,
    0.11154074335010947,
])


def _qmf(dec_lo):
    n = len(dec_lo)
    dec_hi = np.array([(-1) ** (k + 1) * dec_lo[n - 1 - k] for k in range(n)])
    return dec_lo, dec_hi, dec_lo[::-1].copy(), dec_hi[::-1].copy()


DEC_LO, DEC_HI, REC_LO, REC_HI = _qmf(DB6_DEC_LO)
FILTER_LENGTH = len(DB6_DEC_LO)


def max_level(n: int, filter_length: int = FILTER_LENGTH) -> int:
    if n < filter_length - 1:
        return 0
    return int(np.floor(np.log2(n / (filter_length - 1))))


def dwt(x: np.ndarray):
    """Single-level analysis along the last axis. Returns ``(cA, cD)``."""
    x = np.asarray(x, dtype=np.float64)
    f = FILTER_LENGTH
    n_out = (x.shape[-1] + f - 1) // 2
    pad = [(0, 0)] * (x.ndim - 1) + [(f - 1, f - 1)]
    ext = np.pad(x, pad, mode="symmetric")
    windows = sliding_window_view(ext, f, axis=-1)[..., 1::2, :][..., :n_out, :]
    return windows @ DEC_LO[::-1], windows @ DEC_HI[::-1]


def _upsample_convolve(c, h):
    up = np.zeros(c.shape[:-1] + (2 * c.shape[-1],))
    up[..., ::2] = c
    flat = up.reshape(-1, up.shape[-1])
    out = np.stack([np.convolve(row, h) for row in flat])
    return out.reshape(c.shape[:-1] + (out.shape[-1],))


def idwt(ca: np.ndarray, cd: np.ndarray) -> np.ndarray:
    """Single-level synthesis; output length ``2*n - filter_length + 2``."""
    if ca.shape != cd.shape:
        raise ValueError(f"coefficient shapes differ: {ca.shape} vs {cd.shape}")
    f = FILTER_LENGTH
    n = ca.shape[-1]
    full = _upsample_convolve(ca, REC_LO) + _upsample_convolve(cd, REC_HI)
    return full[..., f - 2: f - 2 + 2 * n - f + 2]


def wavedec(x: np.ndarray, level: int):
    x = np.asarray(x, dtype=np.float64)
    if level < 1:
        raise ValueError("level must be >= 1")
    if max_level(x.shape[-1]) < level:
        raise SignalTooShort(
            f"{x.shape[-1]} samples cannot support a level-{level} db6 decomposition"
        )
    details = []
    approx = x
    for _ in range(level):
        approx, detail = dwt(approx)
        details.append(detail)
    return [approx] + details[::-1]


def waverec(coeffs) -> np.ndarray:
    approx = coeffs[0]
    for detail in coeffs[1:]:
        if approx.shape[-1] == detail.shape[-1] + 1:
            approx = approx[..., :-1]
        approx = idwt(approx, detail)
    return approx


def soft_threshold(c: np.ndarray, tau) -> np.ndarray:
    return np.sign(c) * np.maximum(np.abs(c) - tau, 0.0)


def mad_sigma(finest_detail: np.ndarray) -> np.ndarray:
    """Robust noise scale from the finest detail band (per row)."""
    return np.median(np.abs(finest_detail), axis=-1) / 0.6745


def denoise(x: np.ndarray, level: int = 4) -> np.ndarray:
    """Universal-threshold soft denoising of each row of ``x``."""
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[-1]
    coeffs = wavedec(x, level)
    sigma = mad_sigma(coeffs[-1])
    tau = (sigma * np.sqrt(2.0 * np.log(n)))[..., np.newaxis]
    shrunk = [coeffs[0]] + [soft_threshold(d, tau) for d in coeffs[1:]]
    return waverec(shrunk)[..., :n]
