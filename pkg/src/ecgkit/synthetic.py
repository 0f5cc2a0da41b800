"""Deterministic synthetic 12-lead ECGs for tests, demos and smoke runs.

Each beat is a sum of Gaussian P, Q, R, S and T waves; leads differ by fixed
per-lead gains. Optional baseline wander, powerline hum and white noise make
the preprocessing stages do visible work.
"""
from __future__ import annotations

import numpy as np

from .core import LEAD_ORDER, EcgRecord

# (relative time in beat [s], width [s], amplitude [mV]) for P, Q, R, S, T
_WAVES = np.array([
    (-0.20, 0.025, 0.15),
    (-0.05, 0.010, -0.10),
    (0.00, 0.012, 1.00),
    (0.05, 0.012, -0.25),
    (0.25, 0.040, 0.30),
])

_LEAD_GAIN = np.array([
    # P     Q     R     S     T
    [1.0, 1.0, 0.9, 0.6, 1.0],    # I
    [1.2, 1.0, 1.3, 0.8, 1.2],    # II
    [0.4, 0.5, 0.5, 0.4, 0.3],    # III
    [0.5, 0.6, 0.4, 0.5, 0.4],    # aVL
    [-1.0, -0.8, -1.0, -0.7, -1.0],  # aVR
    [0.8, 0.7, 0.9, 0.6, 0.7],    # aVF
    [0.3, 0.2, 0.3, 2.0, -0.2],   # V1
    [0.5, 0.3, 0.6, 2.2, 0.8],    # V2
    [0.6, 0.5, 1.0, 1.5, 1.0],    # V3
    [0.7, 0.8, 1.5, 1.0, 1.1],    # V4
    [0.7, 0.9, 1.4, 0.6, 1.0],    # V5
    [0.6, 0.8, 1.1, 0.4, 0.8],    # V6
])


def synthetic_ecg(
    seed: int = 0,
    fs: float = 500.0,
    seconds: float = 10.0,
    heart_rate: float | None = None,
    noise_mv: float = 0.02,
    wander_mv: float = 0.15,
    powerline_mv: float = 0.05,
    powerline_hz: float | None = None,
    source_id: str | None = None,
) -> EcgRecord:
    rng = np.random.default_rng(seed)
    n = int(round(fs * seconds))
    t = np.arange(n) / fs
    hr = heart_rate if heart_rate is not None else rng.uniform(55, 95)
    rr = 60.0 / hr
    beats = []
    clock = rng.uniform(0.1, rr)
    while clock < seconds + 0.5:
        beats.append(clock)
        clock += rr * rng.normal(1.0, 0.03)
    beats = np.asarray(beats)
    gain = _LEAD_GAIN * rng.normal(1.0, 0.05, size=_LEAD_GAIN.shape)
    x = np.zeros((len(LEAD_ORDER), n))
    for k, (offset, width, amp) in enumerate(_WAVES):
        centers = beats + offset
        wave = np.zeros(n)
        for c in centers:
            lo, hi = np.searchsorted(t, [c - 5 * width, c + 5 * width])
            wave[lo:hi] += amp * np.exp(-0.5 * ((t[lo:hi] - c) / width) ** 2)
        x += gain[:, k:k + 1] * wave
    if wander_mv:
        f = rng.uniform(0.1, 0.4)
        x += wander_mv * np.sin(2 * np.pi * f * t + rng.uniform(0, 2 * np.pi))
    if powerline_mv:
        hz = powerline_hz if powerline_hz is not None else rng.choice([50.0, 60.0])
        if hz < fs / 2:
            x += powerline_mv * np.sin(2 * np.pi * hz * t + rng.uniform(0, 2 * np.pi))
    if noise_mv:
        x += rng.normal(0.0, noise_mv, size=x.shape)
    return EcgRecord(LEAD_ORDER, fs, x, source_id=source_id or f"synth{seed:05d}")


def synthetic_corpus(n: int, seed: int = 0, **kwargs) -> list[EcgRecord]:
    return [synthetic_ecg(seed=seed * 100003 + i, source_id=f"synth{i:05d}", **kwargs)
            for i in range(n)]
