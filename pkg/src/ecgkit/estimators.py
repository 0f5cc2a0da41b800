"""scikit-learn style wrappers around the record-level operations.

Inputs are lists of :class:`EcgRecord` rather than 2-D feature matrices, since
records carry their own sampling rate and lead order. ``check_records``
plays the role of ``check_array``. Only the BPE tokenizer learns anything in
``fit``; the rest are stateless and ``fit`` just validates parameters.
"""
from __future__ import annotations

from typing import Iterable

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .core import LEAD_ORDER, EcgRecord
from .exceptions import ValidationError
from .perturb import PerturbationConfig, perturb, record_rng
from .preprocess import PreprocessConfig, normalize_minmax, preprocess_pipeline
from .render import RenderConfig, render_plot, stack_signal
from .symbolic import (
    SymbolSequence,
    TokenSequence,
    bpe_decode,
    bpe_encode,
    bpe_train,
    dequantize,
    quantize,
)


def check_records(X, fs: float | None = None, leads=LEAD_ORDER) -> list[EcgRecord]:
    """Coerce ``X`` to a list of records.

    Accepts one record, an iterable of records, or a (C, L) / (N, C, L) array
    together with ``fs``.
    """
    if isinstance(X, EcgRecord):
        return [X]
    if isinstance(X, np.ndarray):
        if fs is None:
            raise ValidationError("array input needs fs")
        arr = X[None] if X.ndim == 2 else X
        if arr.ndim != 3:
            raise ValidationError(f"expected a (C, L) or (N, C, L) array, got {X.shape}")
        return [EcgRecord(tuple(leads[: arr.shape[1]]), fs, a) for a in arr]
    out = list(X)
    for i, r in enumerate(out):
        if not isinstance(r, EcgRecord):
            raise ValidationError(f"item {i} is {type(r).__name__}, not EcgRecord")
    if not out:
        raise ValidationError("no records given")
    return out


def check_symbols(X) -> list[SymbolSequence]:
    if isinstance(X, (SymbolSequence, str)):
        X = [X]
    return [s if isinstance(s, SymbolSequence) else SymbolSequence(s) for s in X]


class _Stateless(TransformerMixin, BaseEstimator):
    def fit(self, X=None, y=None):
        self._validate()
        self.is_fitted_ = True
        return self

    def _validate(self):
        pass

    def __sklearn_is_fitted__(self):
        return True


class EcgPreprocessor(_Stateless):
    """Filter chain, resampling and segmentation; returns a flat list of segments."""

    def __init__(self, notch_freqs=(50.0, 60.0), notch_q=30.0, bandpass_low=0.5,
                 bandpass_high=100.0, bandpass_order=4, highpass_cutoff=0.05,
                 highpass_order=4, wavelet="db6", wavelet_level=4, target_fs=250.0,
                 segment_seconds=5.0):
        self.notch_freqs = notch_freqs
        self.notch_q = notch_q
        self.bandpass_low = bandpass_low
        self.bandpass_high = bandpass_high
        self.bandpass_order = bandpass_order
        self.highpass_cutoff = highpass_cutoff
        self.highpass_order = highpass_order
        self.wavelet = wavelet
        self.wavelet_level = wavelet_level
        self.target_fs = target_fs
        self.segment_seconds = segment_seconds

    def config(self) -> PreprocessConfig:
        return PreprocessConfig(**self.get_params())

    def _validate(self):
        self.config()

    def transform(self, X):
        cfg = self.config()
        out = []
        for rec in check_records(X):
            out.extend(preprocess_pipeline(rec, cfg))
        return out


class MinMaxNormalizer(_Stateless):
    """Per-record min-max scaling to [0, 1]; nothing is learned across records."""

    def transform(self, X):
        return [normalize_minmax(r) for r in check_records(X)]


class SymbolQuantizer(_Stateless):
    def __init__(self, fs: float = 250.0):
        self.fs = fs

    def transform(self, X):
        return [quantize(r) for r in check_records(X)]

    def inverse_transform(self, X):
        return [dequantize(s, fs=self.fs) for s in check_symbols(X)]


class BpeTokenizer(TransformerMixin, BaseEstimator):
    """Learns BPE merges on symbol sequences; transforms them to token ids."""

    def __init__(self, num_merges: int = 5000, id_offset: int = 0, n_jobs: int = 1):
        self.num_merges = num_merges
        self.id_offset = id_offset
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        self.vocab_ = bpe_train(check_symbols(X), self.num_merges, self.id_offset, self.n_jobs)
        return self

    def transform(self, X) -> list[TokenSequence]:
        check_is_fitted(self, "vocab_")
        return [bpe_encode(s, self.vocab_) for s in check_symbols(X)]

    def inverse_transform(self, X: Iterable) -> list[SymbolSequence]:
        check_is_fitted(self, "vocab_")
        return [bpe_decode(t, self.vocab_) for t in X]


class SignalStacker(_Stateless):
    """Returns an (N, 3, C, L) array; records must share one shape."""

    def transform(self, X):
        recs = check_records(X)
        shapes = {r.samples.shape for r in recs}
        if len(shapes) != 1:
            raise ValidationError(f"records differ in shape: {sorted(shapes)}")
        return np.stack([stack_signal(r).data for r in recs])


class PlotRenderer(_Stateless):
    def __init__(self, width: int = 1024, height: int = 768, margin: float = 0.05,
                 line_color=(0, 0, 0), background=(255, 255, 255)):
        self.width = width
        self.height = height
        self.margin = margin
        self.line_color = line_color
        self.background = background

    def _validate(self):
        RenderConfig(**self.get_params())

    def transform(self, X):
        cfg = RenderConfig(**self.get_params())
        return [render_plot(r, cfg) for r in check_records(X)]


class Perturber(_Stateless):
    """Keyed by record position, so ``transform`` is deterministic per seed.

    ``start_index`` offsets the keys when a corpus is processed in chunks.
    """

    def __init__(self, p_noise=0.5, noise_scale=0.05, p_wander=0.5, wander_amp=0.07,
                 phase_low=np.pi, phase_high=5 * np.pi, seed=0, start_index=0):
        self.p_noise = p_noise
        self.noise_scale = noise_scale
        self.p_wander = p_wander
        self.wander_amp = wander_amp
        self.phase_low = phase_low
        self.phase_high = phase_high
        self.seed = seed
        self.start_index = start_index

    def config(self) -> PerturbationConfig:
        params = self.get_params()
        params.pop("start_index")
        return PerturbationConfig(**params)

    def _validate(self):
        self.config()

    def transform(self, X):
        cfg = self.config()
        recs = check_records(X)
        out, flags = [], []
        for i, r in enumerate(recs):
            rec, f = perturb(r, cfg, record_rng(cfg.seed, self.start_index + i))
            out.append(rec)
            flags.append(f)
        self.flags_ = flags
        return out
