"""Sentence-level text generation metrics on a 0-100 scale, plus exact-match accuracy."""
from __future__ import annotations

import math
import re
from collections import Counter, defaultdict
from functools import lru_cache
from typing import Callable, Sequence

_TOKEN_RE = re.compile(r"\w+|[^\w\s]")

BLEU_EPSILON = 1e-9


def tokenize(text: str, lowercase: bool = True) -> list[str]:
    """Words and single punctuation marks."""
    if lowercase:
        text = text.lower()
    return _TOKEN_RE.findall(text)


def _as_tokens(x) -> list[str]:
    return tokenize(x) if isinstance(x, str) else list(x)


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu4(candidate, reference, max_n: int = 4, epsilon: float = BLEU_EPSILON) -> float:
    """BLEU with uniform weights and a brevity penalty.

    A zero n-gram match count is floored at ``epsilon`` so short candidates
    lacking higher-order overlap score near zero instead of failing. With no
    unigram overlap at all the score is exactly 0.
    """
    cand, ref = _as_tokens(candidate), _as_tokens(reference)
    if not cand or not ref:
        return 0.0
    log_sum = 0.0
    for n in range(1, max_n + 1):
        c_grams = _ngrams(cand, n)
        r_grams = _ngrams(ref, n)
        matched = sum(min(c, r_grams[g]) for g, c in c_grams.items())
        total = max(1, sum(c_grams.values()))
        if matched == 0:
            if n == 1:
                return 0.0
            log_sum += math.log(epsilon / total)
        else:
            log_sum += math.log(matched / total)
    c, r = len(cand), len(ref)
    bp = 1.0 if c > r else math.exp(1.0 - r / c)
    return 100.0 * bp * math.exp(log_sum / max_n)


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b):
            cur.append(prev[j] + 1 if x == y else max(prev[j + 1], cur[j]))
        prev = cur
    return prev[-1]


def rouge_l(candidate, reference) -> float:
    """LCS F1."""
    cand, ref = _as_tokens(candidate), _as_tokens(reference)
    if not cand or not ref:
        return 0.0
    lcs = lcs_length(cand, ref)
    if lcs == 0:
        return 0.0
    p, r = lcs / len(cand), lcs / len(ref)
    return 100.0 * 2 * p * r / (p + r)


@lru_cache(maxsize=1)
def _porter() -> Callable[[str], str]:
    from nltk.stem.porter import PorterStemmer

    stemmer = PorterStemmer()
    return lru_cache(maxsize=65536)(stemmer.stem)


def _match(hyp: list[tuple[int, str]], ref: list[tuple[int, str]]):
    """Right-to-left greedy alignment of equal words; returns matches and leftovers."""
    free = defaultdict(list)
    for j, (_, word) in enumerate(ref):
        free[word].append(j)
    pairs, used_h, used_r = [], set(), set()
    for i in range(len(hyp) - 1, -1, -1):
        slots = free.get(hyp[i][1])
        if slots:
            j = slots.pop()
            used_h.add(i)
            used_r.add(j)
            pairs.append((hyp[i][0], ref[j][0]))
    rest_h = [w for i, w in enumerate(hyp) if i not in used_h]
    rest_r = [w for j, w in enumerate(ref) if j not in used_r]
    return pairs, rest_h, rest_r


def _chunks(pairs: list[tuple[int, int]]) -> int:
    pairs = sorted(pairs)
    chunks = 1
    for (i0, j0), (i1, j1) in zip(pairs, pairs[1:]):
        if not (i1 == i0 + 1 and j1 == j0 + 1):
            chunks += 1
    return chunks


def meteor_simplified(
    candidate,
    reference,
    stem: bool = True,
    alpha: float = 0.9,
    beta: float = 3.0,
    gamma: float = 0.5,
) -> float:
    """METEOR with exact then Porter-stem matching and no synonym stage."""
    cand, ref = _as_tokens(candidate), _as_tokens(reference)
    if not cand or not ref:
        return 0.0
    hyp_e, ref_e = list(enumerate(cand)), list(enumerate(ref))
    pairs, hyp_e, ref_e = _match(hyp_e, ref_e)
    if stem and hyp_e and ref_e:
        st = _porter()
        more, _, _ = _match([(i, st(w)) for i, w in hyp_e], [(j, st(w)) for j, w in ref_e])
        pairs += more
    m = len(pairs)
    if m == 0:
        return 0.0
    p, r = m / len(cand), m / len(ref)
    fmean = p * r / (alpha * p + (1 - alpha) * r)
    penalty = gamma * (_chunks(pairs) / m) ** beta
    return 100.0 * fmean * (1.0 - penalty)


def accuracy(candidates: Sequence[str], references: Sequence[str]) -> float:
    """Fraction of exact string matches, ignoring trailing whitespace."""
    if len(candidates) != len(references):
        raise ValueError("candidates and references differ in length")
    if not candidates:
        return 0.0
    hits = sum(c.rstrip() == r.rstrip() for c, r in zip(candidates, references))
    return hits / len(candidates)


METRICS: dict[str, Callable] = {
    "bleu": bleu4,
    "rouge_l": rouge_l,
    "meteor": meteor_simplified,
}


def score_pairs(candidates: Sequence[str], references: Sequence[str], n_jobs: int = 1) -> dict:
    """Mean of each sentence metric over aligned pairs, plus accuracy."""
    if len(candidates) != len(references):
        raise ValueError("candidates and references differ in length")
    pairs = [(tokenize(c), tokenize(r)) for c, r in zip(candidates, references)]

    def one(pair):
        return [fn(*pair) for fn in METRICS.values()]

    if n_jobs > 1 and len(pairs) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            rows = list(pool.map(one, pairs))
    else:
        rows = [one(p) for p in pairs]
    out = {}
    for k, name in enumerate(METRICS):
        out[name] = math.fsum(row[k] for row in rows) / len(rows) if rows else 0.0
    out["accuracy"] = accuracy(list(candidates), list(references))
    return out
