from .ops import (
    PreprocessConfig,
    bandpass,
    filter_chain,
    highpass,
    normalize_minmax,
    notch,
    preprocess_pipeline,
    resample,
    resampled_length,
    segment,
    wavelet_denoise,
)

__all__ = [
    "PreprocessConfig",
    "bandpass",
    "filter_chain",
    "highpass",
    "normalize_minmax",
    "notch",
    "preprocess_pipeline",
    "resample",
    "resampled_length",
    "segment",
    "wavelet_denoise",
]
