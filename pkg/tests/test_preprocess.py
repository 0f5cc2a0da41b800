import numpy as np
import pytest
import pywt
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import signal

from ecgkit import LEAD_ORDER, EcgRecord
from ecgkit.exceptions import (
    ConfigError,
    ConstantSignal,
    FrequencyAboveNyquist,
    InvalidBand,
    SignalTooShort,
)
from ecgkit.preprocess import (
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
from ecgkit.preprocess import filters, wavelet
from ecgkit.synthetic import synthetic_ecg

from oracles import (
    apply_mag2,
    butter_bandpass_mag2,
    butter_highpass_mag2,
    central,
    notch_mag2,
    rms,
    tapered_tone,
)


def _lead_rec(x, fs):
    return EcgRecord(("II",), fs, x[None, :])


# ---------------------------------------------------------------- filters


def test_filter_design_matches_analytic_response():
    fs = 500
    f = np.linspace(0.01, fs / 2 - 0.01, 500)
    cases = [
        (filters.notch_sos(50, 30, fs), notch_mag2(50, 30, fs)),
        (filters.butter_sos(4, (0.5, 100), "bandpass", fs), butter_bandpass_mag2(0.5, 100, fs, 4)),
        (filters.butter_sos(4, 0.05, "highpass", fs), butter_highpass_mag2(0.05, fs, 4)),
    ]
    for sos, mag2 in cases:
        _, h = signal.sosfreqz(sos, f, fs=fs)
        np.testing.assert_allclose(np.abs(h) ** 2, mag2(f), atol=1e-9)


@pytest.mark.parametrize("fs", [250, 500])
@pytest.mark.parametrize("freq", [10.0, 50.0, 60.0])
def test_zero_phase_filters_match_oracle(fs, freq):
    x = tapered_tone(freq, fs, phase=0.7)
    for op, mag2 in [
        (lambda r: notch(r, 50, 30), notch_mag2(50, 30, fs)),
        (lambda r: notch(r, 60, 30), notch_mag2(60, 30, fs)),
        (lambda r: bandpass(r, 0.5, 100, 4), butter_bandpass_mag2(0.5, 100, fs, 4)),
        (lambda r: highpass(r, 0.05, 4), butter_highpass_mag2(0.05, fs, 4)),
    ]:
        y = op(_lead_rec(x, fs)).samples[0]
        ref = apply_mag2(x, fs, mag2)
        assert rms(central(y - ref, fs)) / rms(central(x, fs)) < 1e-4


def test_zero_phase_has_no_lag():
    fs = 500
    x = tapered_tone(5.0, fs)
    y = bandpass(_lead_rec(x, fs), 0.5, 100).samples[0]
    xc = np.correlate(central(y, fs), central(x, fs), "full")
    assert np.argmax(xc) == len(central(x, fs)) - 1


def test_filters_operate_per_lead():
    rec = synthetic_ecg(seed=1, seconds=4)
    out = bandpass(rec)
    single = bandpass(EcgRecord(("V3",), rec.fs, rec.samples[8:9]))
    np.testing.assert_allclose(out.samples[8], single.samples[0], atol=1e-12)


def test_settle_length_and_padding():
    sos = filters.butter_sos(4, 0.05, "highpass", 500)
    n = filters.settle_length(sos)
    radius = max(np.abs(np.roots(s[3:])).max() for s in sos)
    assert radius ** n <= 1e-4 < radius ** (n - 1)
    assert filters.pad_length(sos, 100) == 99
    assert filters.pad_length(filters.notch_sos(50, 30, 500), 10**6) >= 9


def test_filter_errors():
    with pytest.raises(FrequencyAboveNyquist):
        filters.notch_sos(60, 30, 100)
    with pytest.raises(InvalidBand):
        filters.butter_sos(4, (0.5, 100), "bandpass", 150)
    with pytest.raises(InvalidBand):
        filters.butter_sos(4, (10, 5), "bandpass", 500)


def test_constant_input_is_removed_by_highpass():
    fs = 500
    x = np.full(10 * fs, 3.0)
    y = highpass(_lead_rec(x, fs)).samples[0]
    assert 20 * np.log10(rms(y) / rms(x)) < -40


# ---------------------------------------------------------------- wavelet


@settings(max_examples=40, deadline=None)
@given(st.integers(64, 700), st.integers(0, 2**31 - 1), st.integers(1, 4))
def test_dwt_matches_pywavelets(n, seed, level):
    x = np.random.default_rng(seed).normal(size=n)
    level = min(level, wavelet.max_level(n))
    ours = wavelet.wavedec(x, level)
    ref = pywt.wavedec(x, "db6", mode="symmetric", level=level)
    assert len(ours) == len(ref)
    for a, b in zip(ours, ref):
        np.testing.assert_allclose(a, b, atol=1e-12)
    np.testing.assert_allclose(wavelet.waverec(ours)[:n], x, atol=1e-10)


def test_db6_filter_bank():
    w = pywt.Wavelet("db6")
    np.testing.assert_allclose(wavelet.DEC_LO, w.dec_lo, atol=1e-15)
    np.testing.assert_allclose(wavelet.DEC_HI, w.dec_hi, atol=1e-15)
    np.testing.assert_allclose(wavelet.REC_LO, w.rec_lo, atol=1e-15)
    np.testing.assert_allclose(wavelet.REC_HI, w.rec_hi, atol=1e-15)
    assert wavelet.max_level(2500) == pywt.dwt_max_level(2500, 12)


def test_soft_threshold():
    c = np.array([-3.0, -0.5, 0.0, 0.2, 2.0])
    np.testing.assert_allclose(wavelet.soft_threshold(c, 1.0), [-2, 0, 0, 0, 1])


def test_denoise_matches_pywt_recipe():
    rng = np.random.default_rng(3)
    x = np.sin(np.linspace(0, 20, 1000)) + 0.2 * rng.normal(size=1000)
    coeffs = pywt.wavedec(x, "db6", mode="symmetric", level=4)
    sigma = np.median(np.abs(coeffs[-1])) / 0.6745
    tau = sigma * np.sqrt(2 * np.log(len(x)))
    coeffs = [coeffs[0]] + [pywt.threshold(c, tau, "soft") for c in coeffs[1:]]
    ref = pywt.waverec(coeffs, "db6", mode="symmetric")[: len(x)]
    np.testing.assert_allclose(wavelet.denoise(x, 4), ref, atol=1e-12)


def test_wavelet_too_short():
    with pytest.raises(SignalTooShort):
        wavelet.wavedec(np.zeros(50), 4)


# ---------------------------------------------------------------- resample / segment


def test_resampled_length_examples():
    assert resampled_length(5000, 500, 250) == 2500
    assert resampled_length(5001, 500, 250) == 2501  # 2500.5 rounds up
    assert resampled_length(1000, 360, 250) == 694
    assert resampled_length(7, 3, 2) == 5  # 4.67


def test_resample_sinusoid():
    fs = 500
    t = np.arange(10 * fs) / fs
    x = np.sin(2 * np.pi * 5 * t)
    y = resample(_lead_rec(x, fs), 250)
    assert y.length == 2500 and y.fs == 250
    t2 = np.arange(2500) / 250
    assert rms(y.samples[0] - np.sin(2 * np.pi * 5 * t2)) < 2e-3
    assert resample(y, 250) is y


def test_segment():
    rec = EcgRecord(("I",), 250, np.arange(2600.0)[None], source_id="r")
    segs = segment(rec, 5.0)
    assert [s.length for s in segs] == [1250, 1250]
    assert [s.source_id for s in segs] == ["r_seg000", "r_seg001"]
    assert segs[1].samples[0, 0] == 1250
    assert segment(rec, 2.0)[0].length == 500


def test_normalize_minmax():
    rec = synthetic_ecg(seed=2, seconds=2)
    out = normalize_minmax(rec)
    assert out.samples.min() == 0.0 and out.samples.max() == 1.0
    with pytest.raises(ConstantSignal):
        normalize_minmax(EcgRecord(("I",), 1, [[2.0, 2.0]]))


def test_pipeline_shapes_and_order():
    rec = synthetic_ecg(seed=4)
    shuffled = EcgRecord(rec.leads[::-1], rec.fs, rec.samples[::-1], source_id="s")
    segs = preprocess_pipeline(shuffled)
    assert len(segs) == 2
    assert all(s.leads == LEAD_ORDER and s.samples.shape == (12, 1250) and s.fs == 250
               for s in segs)
    direct = preprocess_pipeline(rec)
    np.testing.assert_allclose(segs[0].samples, direct[0].samples, atol=1e-12)
    whole = preprocess_pipeline(rec, PreprocessConfig(segment_seconds=None))
    assert len(whole) == 1 and whole[0].length == 2500


def test_filter_chain_removes_powerline():
    rec = synthetic_ecg(seed=5, powerline_mv=0.5, powerline_hz=50.0, noise_mv=0, wander_mv=0)
    clean = synthetic_ecg(seed=5, powerline_mv=0, noise_mv=0, wander_mv=0)
    out = filter_chain(rec).samples
    ref = filter_chain(clean).samples
    resid = central(out - ref, rec.fs)
    assert rms(resid) < 0.02 * 0.5


def test_config_rejects_unknown_and_bad():
    with pytest.raises(ConfigError):
        PreprocessConfig.from_dict({"nope": 1})
    with pytest.raises(ConfigError):
        PreprocessConfig(bandpass_low=200, bandpass_high=100)
    with pytest.raises(ConfigError):
        PreprocessConfig(wavelet="haar")


def test_filter_examples():
    fs = 500
    t = np.arange(10 * fs) / fs
    assert np.abs(bandpass(_lead_rec(np.full(t.size, 5.0), fs)).samples).max() <= 0.05
    assert np.abs(highpass(_lead_rec(np.ones(t.size), fs)).samples).max() <= 0.01
    assert not highpass(_lead_rec(np.zeros(t.size), fs)).samples.any()
    x = tapered_tone(200.0, fs)
    y = bandpass(_lead_rec(x, fs)).samples[0]
    assert 20 * np.log10(rms(central(y, fs)) / rms(central(x, fs))) <= -20


def test_highpass_keeps_tone_under_ramp():
    fs = 500
    t = np.arange(10 * fs) / fs
    y = highpass(_lead_rec(np.sin(2 * np.pi * 10 * t) + 0.5 * t, fs)).samples[0]
    # amplitude of the 10 Hz component, with a cubic absorbing the leftover drift
    basis = np.c_[np.sin(2 * np.pi * 10 * t), np.cos(2 * np.pi * 10 * t),
                  np.ones_like(t), t, t ** 2, t ** 3]
    c = np.linalg.lstsq(basis, y, rcond=None)[0]
    assert abs(np.hypot(c[0], c[1]) - 1) <= 0.02


def test_notch_examples():
    fs = 500
    x = tapered_tone(50.0, fs, phase=0.4)
    y = notch(_lead_rec(x, fs), 50, 30).samples[0]
    assert rms(central(y, fs)) <= 0.03 * rms(central(x, fs))
    dc = np.full(10 * fs, 2.0)
    assert np.abs(notch(_lead_rec(dc, fs), 50, 30).samples[0] - dc).max() <= 1e-6
    x = tapered_tone(5.0, fs, phase=0.4)
    y = notch(_lead_rec(x, fs), 50, 30).samples[0]
    assert abs(rms(central(y, fs)) / rms(central(x, fs)) - 1) <= 0.01


def test_segment_remainders():
    assert segment(EcgRecord(("I",), 250, np.zeros((1, 1249))), 5.0) == []
    segs = segment(EcgRecord(("I",), 250, np.zeros((1, 3000))), 5.0)
    assert [s.length for s in segs] == [1250, 1250]


def test_denoise_keeps_polynomial_trend():
    fs = 250
    t = np.arange(2500) / fs
    for coeffs in ([1, 0.2], [0.3, -0.1, 0.02]):
        x = np.polyval(coeffs, t)
        y = wavelet_denoise(_lead_rec(x, fs)).samples[0]
        assert np.linalg.norm(y - x) <= 1e-3 * np.linalg.norm(x)
    assert not wavelet_denoise(_lead_rec(np.zeros(2500), fs)).samples.any()


def test_normalize_examples():
    rec = EcgRecord(("I", "II"), 1, [[-2.0, 0.0], [6.0, 2.0]])
    out = normalize_minmax(rec).samples
    np.testing.assert_allclose(out, [[0.0, 0.25], [1.0, 0.5]])
    x = np.random.default_rng(0).random((12, 100))
    x[0, 0], x[0, 1] = 0.0, 1.0
    np.testing.assert_allclose(normalize_minmax(EcgRecord(LEAD_ORDER, 1, x)).samples, x, atol=1e-7)
