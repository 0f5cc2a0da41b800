"""Canonical JSON files for symbol and token sequences.

Keys are sorted and there is no whitespace, so equal content always gives
identical bytes.
"""
from __future__ import annotations

import json
from pathlib import Path

from ..exceptions import FormatError
from .bpe import TokenSequence
from .quantize import SymbolSequence


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def _load(path, required: tuple[str, ...]) -> dict:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    if not isinstance(data, dict) or any(k not in data for k in required):
        raise FormatError(f"{path}: expected keys {required}")
    return data


def write_symbols(sym: SymbolSequence, path) -> None:
    Path(path).write_text(
        _dump({"n_leads": sym.n_leads, "length": sym.length, "symbols": sym.symbols}),
        encoding="utf-8",
    )


def read_symbols(path) -> SymbolSequence:
    d = _load(path, ("n_leads", "length", "symbols"))
    return SymbolSequence(d["symbols"], int(d["n_leads"]), int(d["length"]))


def write_tokens(tokens: TokenSequence, path) -> None:
    Path(path).write_text(
        _dump({"n_leads": tokens.n_leads, "length": tokens.length, "ids": list(tokens.ids)}),
        encoding="utf-8",
    )


def read_tokens(path) -> TokenSequence:
    d = _load(path, ("n_leads", "length", "ids"))
    return TokenSequence(tuple(int(i) for i in d["ids"]), int(d["n_leads"]), int(d["length"]))
