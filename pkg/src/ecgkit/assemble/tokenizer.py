"""Text tokenizer interface and a lossless reference implementation.

Real LLM tokenizers live outside this package; anything with ``encode``,
``decode`` and the special ids below can be passed to the assembly functions.
"""
from __future__ import annotations

import json
import re
import threading
from pathlib import Path
from typing import Iterable, Protocol, runtime_checkable

from ..exceptions import FormatError, UnknownSymbol
from .templates import SIGNAL_PLACEHOLDER, all_control_tokens, eot_tokens

PAD_TOKEN = "<pad>"


@runtime_checkable
class TextTokenizer(Protocol):
    pad_id: int
    signal_id: int
    eot_ids: frozenset

    def encode(self, text: str) -> list[int]: ...

    def decode(self, ids: Iterable[int]) -> str: ...


class WhitespaceTokenizer:
    """Splits into control tokens, whitespace runs and non-whitespace runs.

    The vocabulary grows on first sight of a piece, so ``decode(encode(x)) == x``
    for every string. Encoding the same texts in the same order always yields
    the same ids; a frozen tokenizer raises on unseen pieces instead.
    """

    def __init__(self, pieces: Iterable[str] = (), frozen: bool = False):
        self.specials = [PAD_TOKEN] + all_control_tokens()
        self._pieces: list[str] = []
        self._ids: dict[str, int] = {}
        for p in self.specials:
            self._add(p)
        for p in pieces:
            if p not in self._ids:
                self._add(p)
        self.frozen = frozen
        self._lock = threading.Lock()
        alternation = "|".join(re.escape(s) for s in sorted(self.specials, key=len, reverse=True))
        self._pattern = re.compile(f"({alternation})|(\\s+)|([^\\s<]+|<)")

    def _add(self, piece: str) -> int:
        idx = len(self._pieces)
        self._pieces.append(piece)
        self._ids[piece] = idx
        return idx

    @property
    def pad_id(self) -> int:
        return self._ids[PAD_TOKEN]

    @property
    def signal_id(self) -> int:
        return self._ids[SIGNAL_PLACEHOLDER]

    @property
    def eot_ids(self) -> frozenset:
        return frozenset(self._ids[t] for t in eot_tokens())

    def __len__(self):
        return len(self._pieces)

    def split(self, text: str) -> list[str]:
        return [m.group(0) for m in self._pattern.finditer(text)]

    def encode(self, text: str) -> list[int]:
        out = []
        with self._lock:
            for piece in self.split(text):
                idx = self._ids.get(piece)
                if idx is None:
                    if self.frozen:
                        raise UnknownSymbol(f"piece {piece!r} not in frozen vocabulary")
                    idx = self._add(piece)
                out.append(idx)
        return out

    def decode(self, ids: Iterable[int]) -> str:
        pieces = self._pieces
        try:
            return "".join(pieces[i] for i in ids if i != self.pad_id)
        except IndexError:
            raise UnknownSymbol("token id outside vocabulary") from None

    def to_dict(self) -> dict:
        return {"kind": "whitespace", "version": 1, "pieces": self._pieces[len(self.specials):]}

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n")

    @classmethod
    def load(cls, path, frozen: bool = False) -> "WhitespaceTokenizer":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise FormatError(f"tokenizer file {path} is not valid JSON: {exc}") from exc
        if data.get("kind") != "whitespace" or data.get("version") != 1:
            raise FormatError(f"unsupported tokenizer file {path}")
        return cls(data["pieces"], frozen=frozen)
