"""Record-level signal conditioning operations."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, fields
from fractions import Fraction

import numpy as np
from scipy import signal

from ..core import LEAD_ORDER, EcgRecord, reorder_leads
from ..exceptions import ConfigError, ConstantSignal, ValidationError
from . import filters, wavelet

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PreprocessConfig:
    notch_freqs: tuple[float, ...] = (50.0, 60.0)
    notch_q: float = 30.0
    bandpass_low: float = 0.5
    bandpass_high: float = 100.0
    bandpass_order: int = 4
    highpass_cutoff: float = 0.05
    highpass_order: int = 4
    wavelet: str = "db6"
    wavelet_level: int = 4
    target_fs: float = 250.0
    segment_seconds: float | None = 5.0

    def __post_init__(self):
        object.__setattr__(self, "notch_freqs", tuple(float(f) for f in self.notch_freqs))
        if self.notch_q <= 0:
            raise ConfigError("notch_q must be positive")
        if not 0 < self.bandpass_low < self.bandpass_high:
            raise ConfigError("need 0 < bandpass_low < bandpass_high")
        if self.highpass_cutoff <= 0:
            raise ConfigError("highpass_cutoff must be positive")
        if self.wavelet != "db6":
            raise ConfigError("only the db6 wavelet is available")
        if self.wavelet_level < 1:
            raise ConfigError("wavelet_level must be >= 1")
        if self.target_fs <= 0:
            raise ConfigError("target_fs must be positive")
        if self.segment_seconds is not None and self.segment_seconds <= 0:
            raise ConfigError("segment_seconds must be positive")

    @classmethod
    def from_dict(cls, data: dict) -> "PreprocessConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown preprocess keys: {sorted(unknown)}")
        return cls(**data)


def notch(rec: EcgRecord, f0: float = 50.0, q: float = 30.0) -> EcgRecord:
    """Zero-phase second-order notch at ``f0`` Hz."""
    sos = filters.notch_sos(f0, q, rec.fs)
    return rec.with_samples(filters.sosfiltfilt_zero_phase(sos, rec.samples))


def bandpass(rec: EcgRecord, low: float = 0.5, high: float = 100.0, order: int = 4) -> EcgRecord:
    sos = filters.butter_sos(order, (low, high), "bandpass", rec.fs)
    return rec.with_samples(filters.sosfiltfilt_zero_phase(sos, rec.samples))


def highpass(rec: EcgRecord, cutoff: float = 0.05, order: int = 4) -> EcgRecord:
    sos = filters.butter_sos(order, cutoff, "highpass", rec.fs)
    return rec.with_samples(filters.sosfiltfilt_zero_phase(sos, rec.samples))


def wavelet_denoise(rec: EcgRecord, wavelet_name: str = "db6", level: int = 4) -> EcgRecord:
    """Per-lead db6 soft-threshold denoising (MAD of level-1 details, universal threshold)."""
    if wavelet_name != "db6":
        raise ValidationError(f"unsupported wavelet {wavelet_name!r}")
    return rec.with_samples(wavelet.denoise(rec.samples, level))


def resampled_length(n: int, fs: float, target_fs: float) -> int:
    """``round(n * target_fs / fs)`` with halves rounded up."""
    return int(np.floor(n * Fraction(target_fs).limit_denominator(10**6)
                        / Fraction(fs).limit_denominator(10**6) + Fraction(1, 2)))


def resample(rec: EcgRecord, target_fs: float = 250.0) -> EcgRecord:
    """Rational polyphase resampling with a Kaiser anti-aliasing FIR."""
    if target_fs <= 0:
        raise ValidationError("target_fs must be positive")
    if rec.fs == target_fs:
        return rec
    ratio = (Fraction(target_fs).limit_denominator(10**6)
             / Fraction(rec.fs).limit_denominator(10**6))
    up, down = ratio.numerator, ratio.denominator
    y = signal.resample_poly(rec.samples, up, down, axis=-1, padtype="line")
    n_out = resampled_length(rec.length, rec.fs, target_fs)
    if n_out < 1:
        raise ValidationError("record too short to resample")
    if y.shape[-1] >= n_out:
        y = y[:, :n_out]
    else:
        y = np.pad(y, ((0, 0), (0, n_out - y.shape[-1])), mode="edge")
    return rec.with_samples(y, fs=target_fs)


def segment_length(fs: float, seconds: float) -> int:
    n = int(round(fs * seconds))
    if n < 1:
        raise ValidationError(f"segment of {seconds} s at {fs} Hz has no samples")
    return n


def segment(rec: EcgRecord, seconds: float = 5.0) -> list[EcgRecord]:
    """Non-overlapping windows of ``seconds``; the trailing remainder is dropped."""
    n = segment_length(rec.fs, seconds)
    count = rec.length // n
    out = []
    for i in range(count):
        sid = f"{rec.source_id}_seg{i:03d}" if rec.source_id else f"seg{i:03d}"
        out.append(EcgRecord(rec.leads, rec.fs, rec.samples[:, i * n:(i + 1) * n], source_id=sid))
    return out


def normalize_minmax(rec: EcgRecord) -> EcgRecord:
    """Scale the whole record (all leads jointly) onto [0, 1]."""
    lo = rec.samples.min()
    hi = rec.samples.max()
    if not hi > lo:
        raise ConstantSignal("cannot min-max normalize a constant record")
    scaled = (rec.samples - lo) / (hi - lo)
    # pin the extremes against rounding
    scaled[rec.samples == lo] = 0.0
    scaled[rec.samples == hi] = 1.0
    return rec.with_samples(np.clip(scaled, 0.0, 1.0))


def filter_chain(rec: EcgRecord, cfg: PreprocessConfig = PreprocessConfig()) -> EcgRecord:
    """Lead reordering plus every conditioning stage that precedes resampling."""
    rec = reorder_leads(rec, LEAD_ORDER)
    for f0 in cfg.notch_freqs:
        rec = notch(rec, f0, cfg.notch_q)
    rec = bandpass(rec, cfg.bandpass_low, cfg.bandpass_high, cfg.bandpass_order)
    rec = highpass(rec, cfg.highpass_cutoff, cfg.highpass_order)
    return wavelet_denoise(rec, cfg.wavelet, cfg.wavelet_level)


def preprocess_pipeline(rec: EcgRecord, cfg: PreprocessConfig = PreprocessConfig()) -> list[EcgRecord]:
    """Full conditioning chain. Normalization is left to each consumer."""
    rec = resample(filter_chain(rec, cfg), cfg.target_fs)
    if cfg.segment_seconds is None:
        return [rec]
    segments = segment(rec, cfg.segment_seconds)
    if not segments:
        logger.warning("record %s shorter than one segment; dropped", rec.source_id or "<anon>")
    return segments
