"""Byte-pair encoding over the 26-symbol amplitude alphabet.

Training keeps the corpus as one doubly linked token array with an index from
each adjacent pair to the positions where it starts, so a merge only touches
the occurrences it rewrites. The most frequent pair is selected from a lazy
max-heap; ties go to the lexicographically smallest (left, right) strings.
Merging never crosses a sequence boundary, and each merge rewrites its
occurrences left to right without overlap, so ``"aaa"`` becomes ``aa a``.
"""
from __future__ import annotations

import heapq
import json
from collections import Counter, defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ..exceptions import EmptyCorpus, FormatError, UnknownSymbol, ValidationError
from .quantize import ALPHABET, SymbolSequence

VOCAB_FORMAT_VERSION = 1
N_BASE = len(ALPHABET)


@dataclass(frozen=True)
class BpeVocab:
    merges: tuple[tuple[str, str], ...] = ()
    id_offset: int = 0

    def __post_init__(self):
        merges = tuple((str(a), str(b)) for a, b in self.merges)
        object.__setattr__(self, "merges", merges)
        if self.id_offset < 0:
            raise ValidationError("id_offset must be non-negative")
        known = set(ALPHABET)
        for left, right in merges:
            if left not in known or right not in known:
                raise ValidationError(f"merge ({left!r}, {right!r}) uses an undefined token")
            merged = left + right
            if merged in known:
                raise ValidationError(f"duplicate token {merged!r}")
            known.add(merged)

    def __len__(self):
        return N_BASE + len(self.merges)

    @property
    def tokens(self) -> list[str]:
        return list(ALPHABET) + [a + b for a, b in self.merges]

    def token_id(self, token: str) -> int:
        return self._index[token] + self.id_offset

    def token_str(self, token_id: int) -> str:
        idx = token_id - self.id_offset
        if not 0 <= idx < len(self):
            raise UnknownSymbol(f"token id {token_id} not in vocabulary")
        return self.tokens[idx]

    @property
    def _index(self) -> dict[str, int]:
        cache = self.__dict__.get("_index_cache")
        if cache is None:
            cache = {tok: i for i, tok in enumerate(self.tokens)}
            object.__setattr__(self, "_index_cache", cache)
        return cache

    def _merge_table(self) -> dict[tuple[int, int], int]:
        """(left index, right index) -> merged index; merge rank is ``index - 26``."""
        cache = self.__dict__.get("_merge_cache")
        if cache is None:
            index = self._index
            cache = {
                (index[a], index[b]): N_BASE + rank for rank, (a, b) in enumerate(self.merges)
            }
            object.__setattr__(self, "_merge_cache", cache)
        return cache

    def to_dict(self) -> dict:
        return {
            "version": VOCAB_FORMAT_VERSION,
            "alphabet": ALPHABET,
            "id_offset": self.id_offset,
            "merges": [list(m) for m in self.merges],
        }


@dataclass(frozen=True)
class TokenSequence:
    ids: tuple[int, ...]
    n_leads: int = 1
    length: int = -1

    def __len__(self):
        return len(self.ids)


def _as_symbols(seq) -> str:
    if isinstance(seq, SymbolSequence):
        return seq.symbols
    text = str(seq)
    bad = set(text) - set(ALPHABET)
    if bad:
        raise UnknownSymbol(f"symbols outside a-z: {sorted(bad)[:5]}")
    return text


def _to_codes(text: str) -> np.ndarray:
    return np.frombuffer(text.encode("ascii"), dtype=np.uint8).astype(np.int64) - ord("a")


# ---------------------------------------------------------------- training


def _count_shard(codes: list[np.ndarray], offsets: list[int]):
    counts: Counter = Counter()
    positions: dict = defaultdict(list)
    for arr, off in zip(codes, offsets):
        if len(arr) < 2:
            continue
        keys = arr[:-1] * N_BASE + arr[1:]
        order = np.argsort(keys, kind="stable")
        sorted_keys = keys[order]
        uniq, starts, cnts = np.unique(sorted_keys, return_index=True, return_counts=True)
        for key, start, cnt in zip(uniq.tolist(), starts.tolist(), cnts.tolist()):
            pair = divmod(key, N_BASE)
            counts[pair] += cnt
            positions[pair].extend((order[start:start + cnt] + off).tolist())
    return counts, positions


class _Trainer:
    def __init__(self, texts: Sequence[str], n_jobs: int = 1):
        codes = [_to_codes(t) for t in texts]
        offsets = np.cumsum([0] + [len(c) for c in codes[:-1]]).tolist()
        total = sum(len(c) for c in codes)
        self.tok = np.concatenate(codes).tolist() if total else []
        nxt = list(range(1, total + 1))
        prv = list(range(-1, total - 1))
        for arr, off in zip(codes, offsets):
            if len(arr):
                nxt[off + len(arr) - 1] = -1
                prv[off] = -1
        self.nxt, self.prv = nxt, prv
        self.strings = list(ALPHABET)

        n_jobs = max(1, int(n_jobs))
        shards = [list(range(i, len(codes), n_jobs)) for i in range(n_jobs)]
        jobs = [([codes[i] for i in s], [offsets[i] for i in s]) for s in shards if s]
        if n_jobs > 1 and len(jobs) > 1:
            with ThreadPoolExecutor(max_workers=n_jobs) as pool:
                results = list(pool.map(lambda job: _count_shard(*job), jobs))
        else:
            results = [_count_shard(*job) for job in jobs]
        # deterministic reduction: sums, and position sets are order-free
        self.counts: Counter = Counter()
        self.where: dict[tuple[int, int], set[int]] = defaultdict(set)
        for counts, positions in results:
            self.counts.update(counts)
            for pair, pos in positions.items():
                self.where[pair].update(pos)
        self.heap: list = []
        for pair, cnt in self.counts.items():
            self._push(pair, cnt)

    def _push(self, pair, cnt):
        a, b = pair
        heapq.heappush(self.heap, (-cnt, self.strings[a], self.strings[b], a, b))

    def best_pair(self):
        heap, counts = self.heap, self.counts
        while heap:
            neg, _, _, a, b = heap[0]
            if counts.get((a, b), 0) == -neg:
                return (a, b), -neg
            heapq.heappop(heap)
        return None, 0

    def _add(self, pair, pos, touched):
        self.counts[pair] += 1
        self.where[pair].add(pos)
        touched.add(pair)

    def _remove(self, pair, pos, touched):
        self.counts[pair] -= 1
        self.where[pair].discard(pos)
        touched.add(pair)

    def merge(self, pair) -> int:
        a, b = pair
        new = len(self.strings)
        self.strings.append(self.strings[a] + self.strings[b])
        tok, nxt, prv = self.tok, self.nxt, self.prv
        touched: set = set()
        for i in sorted(self.where[pair]):
            if tok[i] != a:
                continue
            j = nxt[i]
            if j < 0 or tok[j] != b:
                continue
            p, k = prv[i], nxt[j]
            if p >= 0:
                self._remove((tok[p], a), p, touched)
            if k >= 0:
                self._remove((b, tok[k]), j, touched)
            tok[i] = new
            tok[j] = -1
            nxt[i] = k
            if k >= 0:
                prv[k] = i
            if p >= 0:
                self._add((tok[p], new), p, touched)
            if k >= 0:
                self._add((new, tok[k]), i, touched)
        del self.counts[pair]
        del self.where[pair]
        touched.discard(pair)
        for t in sorted(touched):
            cnt = self.counts.get(t, 0)
            if cnt > 0:
                self._push(t, cnt)
            else:
                self.counts.pop(t, None)
                self.where.pop(t, None)
        return new


def bpe_train(
    corpus: Iterable,
    num_merges: int,
    id_offset: int = 0,
    n_jobs: int = 1,
    min_frequency: int = 2,
) -> BpeVocab:
    """Learn up to ``num_merges`` merges; stops early once no pair occurs twice."""
    texts = [_as_symbols(s) for s in corpus]
    if not texts or not any(texts):
        raise EmptyCorpus("BPE training needs at least one non-empty sequence")
    if num_merges < 0:
        raise ValidationError("num_merges must be >= 0")
    trainer = _Trainer(texts, n_jobs=n_jobs)
    merges = []
    for _ in range(num_merges):
        pair, count = trainer.best_pair()
        if pair is None or count < min_frequency:
            break
        left, right = trainer.strings[pair[0]], trainer.strings[pair[1]]
        trainer.merge(pair)
        merges.append((left, right))
    return BpeVocab(tuple(merges), id_offset=id_offset)


# ---------------------------------------------------------------- encode/decode


def _encode_indices(codes: Sequence[int], table: dict[tuple[int, int], int]) -> list[int]:
    tok = list(codes)
    n = len(tok)
    if n < 2 or not table:
        return tok
    nxt = list(range(1, n + 1))
    nxt[-1] = -1
    prv = list(range(-1, n - 1))
    heap = []
    for i in range(n - 1):
        new = table.get((tok[i], tok[i + 1]))
        if new is not None:
            heap.append((new, i))
    heapq.heapify(heap)
    while heap:
        rank = heap[0][0]
        batch = []
        while heap and heap[0][0] == rank:
            batch.append(heapq.heappop(heap)[1])
        for i in sorted(batch):
            j = nxt[i]
            if tok[i] < 0 or j < 0 or table.get((tok[i], tok[j])) != rank:
                continue
            k = nxt[j]
            tok[i] = rank
            tok[j] = -1
            nxt[i] = k
            if k >= 0:
                prv[k] = i
            p = prv[i]
            if p >= 0:
                new = table.get((tok[p], rank))
                if new is not None:
                    heapq.heappush(heap, (new, p))
            if k >= 0:
                new = table.get((rank, tok[k]))
                if new is not None:
                    heapq.heappush(heap, (new, i))
    out = []
    i = 0
    while i >= 0:
        out.append(tok[i])
        i = nxt[i]
    return out


def bpe_encode(sym, vocab: BpeVocab) -> TokenSequence:
    """Apply the merges in training order; returns vocabulary token ids."""
    text = _as_symbols(sym)
    indices = _encode_indices(_to_codes(text).tolist(), vocab._merge_table())
    ids = tuple(i + vocab.id_offset for i in indices)
    if isinstance(sym, SymbolSequence):
        return TokenSequence(ids, sym.n_leads, sym.length)
    return TokenSequence(ids, 1, len(text))


def bpe_decode(tokens, vocab: BpeVocab) -> SymbolSequence:
    if isinstance(tokens, TokenSequence):
        ids, n_leads, length = tokens.ids, tokens.n_leads, tokens.length
    else:
        ids, n_leads, length = tuple(tokens), 1, -1
    text = "".join(vocab.token_str(i) for i in ids)
    return SymbolSequence(text, n_leads, length if length >= 0 else len(text) // n_leads)


# ---------------------------------------------------------------- persistence


def dumps_vocab(vocab: BpeVocab) -> str:
    return json.dumps(vocab.to_dict(), indent=1) + "\n"


def save_vocab(vocab: BpeVocab, path) -> None:
    Path(path).write_text(dumps_vocab(vocab))


def load_vocab(path) -> BpeVocab:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"vocab file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict) or data.get("version") != VOCAB_FORMAT_VERSION:
        raise FormatError(f"unsupported vocab file version in {path}")
    if data.get("alphabet") != ALPHABET:
        raise FormatError("vocab alphabet must be a-z")
    merges = data.get("merges")
    if not isinstance(merges, list) or any(
        not isinstance(m, list) or len(m) != 2 for m in merges
    ):
        raise FormatError("merges must be a list of [left, right] pairs")
    return BpeVocab(tuple(tuple(m) for m in merges), id_offset=int(data.get("id_offset", 0)))
