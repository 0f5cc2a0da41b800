"""Robustness perturbation: random Gaussian noise, then optional baseline wander."""
from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import NamedTuple

import numpy as np

from .core import EcgRecord
from .exceptions import ConfigError


@dataclass(frozen=True)
class PerturbationConfig:
    p_noise: float = 0.5
    noise_scale: float = 0.05
    p_wander: float = 0.5
    wander_amp: float = 0.07
    phase_low: float = math.pi
    phase_high: float = 5 * math.pi
    seed: int = 0

    def __post_init__(self):
        for name in ("p_noise", "p_wander"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1]")
        if self.noise_scale < 0 or self.wander_amp < 0:
            raise ConfigError("noise_scale and wander_amp must be >= 0")
        if self.phase_low > self.phase_high:
            raise ConfigError("phase_low must not exceed phase_high")

    @classmethod
    def from_dict(cls, data: dict) -> "PerturbationConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown perturb keys: {sorted(unknown)}")
        return cls(**data)


class AppliedFlags(NamedTuple):
    noise_applied: bool
    wander_applied: bool
    phase: float | None = None  # total wander phase in radians, when applied


def record_rng(seed: int, index: int) -> np.random.Generator:
    """Counter-based stream keyed by (seed, record index).

    Independent of processing order, so corpora can be perturbed in parallel.
    """
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, index & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def baseline_wander(length: int, amplitude: float, phase: float) -> np.ndarray:
    """``amplitude * sin(phase * t / (L - 1))`` for t = 0 .. L-1."""
    if length == 1:
        return np.zeros(1)
    t = np.arange(length) / (length - 1)
    return amplitude * np.sin(phase * t)


def perturb(rec: EcgRecord, cfg: PerturbationConfig, rng: np.random.Generator):
    """Returns ``(record, AppliedFlags)``; the input is returned as-is if unselected.

    Noise std and wander amplitude are derived from the clean record, pooled
    over all leads.
    """
    if rng.random() >= cfg.p_noise:
        return rec, AppliedFlags(False, False)
    x = rec.samples
    sigma = float(x.std(ddof=1)) if x.size > 1 else 0.0
    peak = float(np.abs(x).max())
    out = x + rng.normal(0.0, cfg.noise_scale * sigma, size=x.shape)
    phase = None
    if rng.random() < cfg.p_wander:
        phase = float(rng.uniform(cfg.phase_low, cfg.phase_high))
        out = out + baseline_wander(rec.length, cfg.wander_amp * peak, phase)
    return rec.with_samples(out), AppliedFlags(True, phase is not None, phase)


def perturb_corpus(records, cfg: PerturbationConfig, start_index: int = 0):
    """Perturb ``records`` with one keyed stream per record index."""
    return [perturb(r, cfg, record_rng(cfg.seed, start_index + i)) for i, r in enumerate(records)]
