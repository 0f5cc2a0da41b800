"""Independent reference implementations used only by the tests.

None of these share code with the package: filters are checked against
closed-form magnitude responses applied in the frequency domain, BPE against
a quadratic-time trainer, labels against a walk over the token stream, and win
counts against a direct recount with scipy's t-test.
"""
from __future__ import annotations

from collections import Counter

import numpy as np
from scipy import signal, stats


# ---------------------------------------------------------------- filters
# Forward-backward filtering multiplies the spectrum by |H|^2.


def butter_highpass_mag2(fc, fs, order):
    def m(f):
        w = np.tan(np.pi * f / fs)
        wc = np.tan(np.pi * fc / fs)
        with np.errstate(divide="ignore"):
            return 1.0 / (1.0 + (wc / w) ** (2 * order))
    return m


def butter_bandpass_mag2(lo, hi, fs, order):
    def m(f):
        w = np.tan(np.pi * f / fs)
        wl, wh = np.tan(np.pi * lo / fs), np.tan(np.pi * hi / fs)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = (w ** 2 - wl * wh) / (w * (wh - wl))
            out = 1.0 / (1.0 + r ** (2 * order))
        return np.nan_to_num(out)
    return m


def notch_mag2(f0, q, fs):
    def m(f):
        w = 2 * np.pi * f / fs
        w0 = 2 * np.pi * f0 / fs
        beta = np.tan(w0 / (2 * q))
        num = (np.cos(w) - np.cos(w0)) ** 2
        return num / (num + beta ** 2 * np.sin(w) ** 2)
    return m


def chain_mag2(fs):
    parts = [
        notch_mag2(50, 30, fs),
        notch_mag2(60, 30, fs),
        butter_bandpass_mag2(0.5, 100, fs, 4),
        butter_highpass_mag2(0.05, fs, 4),
    ]
    return lambda f: np.prod([p(f) for p in parts], axis=0)


def apply_mag2(x, fs, mag2):
    spec = np.fft.rfft(x)
    f = np.fft.rfftfreq(len(x), 1.0 / fs)
    return np.fft.irfft(spec * mag2(f), n=len(x))


def tapered_tone(freq, fs, seconds=10.0, phase=0.0, taper=0.2):
    t = np.arange(int(round(seconds * fs))) / fs
    return signal.windows.tukey(len(t), taper) * np.sin(2 * np.pi * freq * t + phase)


def central(x, fs, lo=2.0, hi=8.0):
    return x[..., int(lo * fs): int(hi * fs)]


def rms(x):
    return float(np.sqrt(np.mean(np.square(x))))


# ---------------------------------------------------------------- BPE


def naive_apply(seq, pair):
    out, i = [], 0
    while i < len(seq):
        if i + 1 < len(seq) and (seq[i], seq[i + 1]) == pair:
            out.append(seq[i] + seq[i + 1])
            i += 2
        else:
            out.append(seq[i])
            i += 1
    return out


def naive_bpe_train(texts, k):
    seqs = [list(t) for t in texts]
    merges = []
    for _ in range(k):
        counts = Counter()
        for s in seqs:
            counts.update(zip(s, s[1:]))
        if not counts:
            break
        best = min(counts, key=lambda p: (-counts[p], p))
        if counts[best] < 2:
            break
        merges.append(best)
        seqs = [naive_apply(s, best) for s in seqs]
    return merges


def naive_bpe_encode(text, merges):
    seq = list(text)
    for m in merges:
        seq = naive_apply(seq, m)
    return seq


# ---------------------------------------------------------------- labels


def span_walk_labels(tokens, header_ids, eot_id):
    """Labels by walking the token stream.

    After each occurrence of the assistant header, every position up to and
    including the next end-of-turn id is a target; everything else is -100.
    """
    labels = [-100] * len(tokens)
    h = len(header_ids)
    inside = False
    for i, tok in enumerate(tokens):
        if inside:
            labels[i] = tok
            if tok == eot_id:
                inside = False
        elif i + 1 >= h and list(tokens[i + 1 - h: i + 1]) == list(header_ids):
            inside = True
    return labels


# ---------------------------------------------------------------- statistics


def brute_force_wins(rows, alpha=0.05):
    """rows: (dataset, model, metric, seed, value). Rank by mean, test top two with scipy."""
    cells = {}
    for d, m, k, s, v in rows:
        cells.setdefault((d, k), {}).setdefault(m, {})[s] = v
    wins = Counter()
    models = sorted({r[1] for r in rows})
    for m in models:
        wins[m] = 0
    for (d, k), per_model in sorted(cells.items()):
        means = {m: np.mean(list(v.values())) for m, v in per_model.items()}
        ranked = sorted(means, key=lambda m: (-means[m], m))
        top, second = ranked[0], ranked[1]
        seeds = sorted(per_model[top])
        a = [per_model[top][s] for s in seeds]
        b = [per_model[second][s] for s in seeds]
        diff = np.subtract(a, b)
        if np.all(diff == diff[0]):
            p = 1.0 if diff[0] == 0 else 0.0
        else:
            p = stats.ttest_rel(a, b).pvalue
        if p < alpha:
            wins[top] += 1
    return dict(wins)
