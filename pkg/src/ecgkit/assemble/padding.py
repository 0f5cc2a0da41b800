"""Fixed-length sequence assembly and target-label masking.

Two layouts are supported. In the latent layout the signal is one placeholder
token and the whole sequence is left-padded or cut to its first ``T`` tokens.
In the tokenized layout the signal is a run of symbolic ids that always keeps
at least ``min_signal`` of them; the text gives way first, from its end.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ..exceptions import (
    BudgetInfeasible,
    SignalTokenTruncated,
    SpanOutOfRange,
    ValidationError,
)
from .templates import TARGET_KINDS, Conversation, Kind, get_template, render_segments

IGNORE_INDEX = -100


@dataclass(frozen=True)
class AssembledSample:
    tokens: tuple[int, ...]
    labels: tuple[int, ...]
    signal_span: tuple[int, int]  # (start, length)
    pad_count: int
    template: str
    id: str = ""
    degenerate: bool = False
    text_dropped: int = 0

    def __post_init__(self):
        if len(self.tokens) != len(self.labels):
            raise ValidationError("tokens and labels differ in length")

    def __len__(self):
        return len(self.tokens)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "tokens": list(self.tokens),
            "labels": list(self.labels),
            "signal_span": list(self.signal_span),
            "template": self.template,
            "pad_count": self.pad_count,
            "degenerate": self.degenerate,
            "text_dropped": self.text_dropped,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AssembledSample":
        return cls(
            tokens=tuple(data["tokens"]),
            labels=tuple(data["labels"]),
            signal_span=tuple(data["signal_span"]),
            pad_count=int(data.get("pad_count", 0)),
            template=data["template"],
            id=data.get("id", ""),
            degenerate=bool(data.get("degenerate", False)),
            text_dropped=int(data.get("text_dropped", 0)),
        )


def tokenize_segments(conv: Conversation, template, tokenizer):
    """Token ids and a parallel array of :class:`Kind` codes for the rendered conversation."""
    ids: list[int] = []
    kinds: list[int] = []
    for text, kind in render_segments(conv, template):
        if kind == Kind.SIGNAL:
            piece = [tokenizer.signal_id]
        else:
            piece = tokenizer.encode(text)
        ids.extend(piece)
        kinds.extend([int(kind)] * len(piece))
    return ids, kinds


def _spans(mask: np.ndarray) -> list[tuple[int, int]]:
    """Half-open ``(start, end)`` runs of True in ``mask``."""
    edges = np.diff(np.concatenate([[0], mask.astype(np.int8), [0]]))
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1)
    return list(zip(starts.tolist(), ends.tolist()))


def build_labels(
    tokens: Sequence[int],
    response_spans: Iterable[tuple[int, int]],
    eot_positions: Iterable[int],
) -> list[int]:
    """Copy tokens at response spans (half-open) and end-of-turn positions; mask the rest."""
    n = len(tokens)
    keep = np.zeros(n, dtype=bool)
    for start, end in response_spans:
        if not 0 <= start <= end <= n:
            raise SpanOutOfRange(f"span ({start}, {end}) outside [0, {n})")
        keep[start:end] = True
    for pos in eot_positions:
        if not 0 <= pos < n:
            raise SpanOutOfRange(f"end-of-turn position {pos} outside [0, {n})")
        keep[pos] = True
    toks = np.asarray(tokens, dtype=np.int64)
    return np.where(keep, toks, IGNORE_INDEX).tolist()


def _finish(tokens, kinds, pad_id, T, template, conv_id, text_dropped=0) -> AssembledSample:
    pad = T - len(tokens)
    tokens = [pad_id] * pad + list(tokens)
    kinds = np.asarray([int(Kind.PAD)] * pad + list(kinds), dtype=np.int8)
    labels = build_labels(
        tokens,
        _spans(kinds == Kind.RESPONSE),
        np.flatnonzero(kinds == Kind.RESPONSE_EOT).tolist(),
    )
    sig = np.flatnonzero(kinds == Kind.SIGNAL)
    span = (int(sig[0]), len(sig)) if len(sig) else (pad, 0)
    return AssembledSample(
        tokens=tuple(tokens),
        labels=tuple(labels),
        signal_span=span,
        pad_count=pad,
        template=get_template(template).name,
        id=conv_id,
        degenerate=all(l == IGNORE_INDEX for l in labels),
        text_dropped=text_dropped,
    )


def _check_T(T: int) -> None:
    if T < 1:
        raise ValidationError("sequence length T must be >= 1")


def assemble_latent(conv: Conversation, template, tokenizer, T: int) -> AssembledSample:
    """Single ``<signal>`` token; left-pad short sequences, keep the first ``T`` of long ones."""
    _check_T(T)
    ids, kinds = tokenize_segments(conv, template, tokenizer)
    ids, kinds = ids[:T], kinds[:T]
    if int(Kind.SIGNAL) not in kinds:
        raise SignalTokenTruncated(f"signal placeholder falls outside the first {T} tokens")
    return _finish(ids, kinds, tokenizer.pad_id, T, template, conv.id)


def signal_budget(s: int, x: int, T: int, min_signal: int = 500) -> int:
    """Number of signal tokens kept: ``min(s, max(min_signal, T - x))``."""
    if min(s, min_signal) >= T:
        raise BudgetInfeasible(
            f"{min(s, min_signal)} required signal tokens leave no room for text at T={T}"
        )
    return min(s, max(min_signal, T - x))


def assemble_tokenized(
    conv: Conversation,
    template,
    tokenizer,
    x_id: Sequence[int],
    T: int,
    min_signal: int = 500,
) -> AssembledSample:
    """Splice symbolic signal ids in place of ``<signal>`` under a length budget of ``T``."""
    _check_T(T)
    ids, kinds = tokenize_segments(conv, template, tokenizer)
    where = kinds.index(int(Kind.SIGNAL))
    before_ids, before_kinds = ids[:where], kinds[:where]
    after_ids, after_kinds = ids[where + 1:], kinds[where + 1:]
    signal = list(getattr(x_id, "ids", x_id))
    x = len(before_ids) + len(after_ids)
    k = signal_budget(len(signal), x, T, min_signal)
    room = T - k
    dropped = max(0, x - room)
    if dropped:
        # drop text from the end of the text region
        keep_after = max(0, len(after_ids) - dropped)
        after_ids, after_kinds = after_ids[:keep_after], after_kinds[:keep_after]
        keep_before = min(len(before_ids), room - keep_after)
        before_ids, before_kinds = before_ids[:keep_before], before_kinds[:keep_before]
    out_ids = before_ids + signal[:k] + after_ids
    out_kinds = before_kinds + [int(Kind.SIGNAL)] * k + after_kinds
    return _finish(out_ids, out_kinds, tokenizer.pad_id, T, template, conv.id, dropped)


# ---------------------------------------------------------------- JSONL


def read_conversations(path) -> list[Conversation]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from exc
            out.append(Conversation.from_dict(data))
    return out


def write_conversations(convs: Iterable[Conversation], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for c in convs:
            rec = {"id": c.id, "turns": [{"q": t.query, "s": t.response} for t in c.turns]}
            if c.system_prompt is not None:
                rec["system"] = c.system_prompt
            if c.signal_ref is not None:
                rec["signal_ref"] = c.signal_ref
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def write_samples(samples: Iterable[AssembledSample], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in samples:
            fh.write(json.dumps(s.to_dict(), separators=(",", ":")) + "\n")


def read_samples(path) -> list[AssembledSample]:
    with open(path, encoding="utf-8") as fh:
        return [AssembledSample.from_dict(json.loads(line)) for line in fh if line.strip()]
