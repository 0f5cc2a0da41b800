"""Uniform 26-letter amplitude quantization."""
from __future__ import annotations

import string
from dataclasses import dataclass

import numpy as np

from ..core import LEAD_ORDER, EcgRecord
from ..exceptions import SampleOutOfRange, UnknownSymbol, ValidationError

ALPHABET = string.ascii_lowercase
N_BINS = len(ALPHABET)
_LUT = np.frombuffer(ALPHABET.encode("ascii"), dtype=np.uint8)


@dataclass(frozen=True)
class SymbolSequence:
    """Flattened (lead-major) symbol string plus the (C, L) shape it came from."""

    symbols: str
    n_leads: int = 1
    length: int = -1

    def __post_init__(self):
        symbols = str(self.symbols)
        if self.n_leads >= 1 and self.length < 0:
            length = len(symbols) // self.n_leads
        else:
            length = int(self.length)
        if self.n_leads < 1:
            raise ValidationError("n_leads must be >= 1")
        if self.n_leads * length != len(symbols):
            raise ValidationError(
                f"{len(symbols)} symbols do not fill a {self.n_leads}x{length} grid"
            )
        bad = set(symbols) - set(ALPHABET)
        if bad:
            raise UnknownSymbol(f"symbols outside a-z: {sorted(bad)[:5]}")
        object.__setattr__(self, "symbols", symbols)
        object.__setattr__(self, "length", length)

    def __len__(self):
        return len(self.symbols)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_leads, self.length)


def quantize(rec: EcgRecord) -> SymbolSequence:
    """Map a [0, 1]-normalized record onto letters, bin = min(floor(26 x), 25)."""
    x = rec.samples
    if x.min() < 0.0 or x.max() > 1.0:
        raise SampleOutOfRange(
            f"samples must lie in [0, 1]; got [{x.min():.6g}, {x.max():.6g}]"
        )
    bins = np.minimum(np.floor(x * N_BINS), N_BINS - 1).astype(np.intp)
    text = _LUT[bins.ravel(order="C")].tobytes().decode("ascii")
    return SymbolSequence(text, rec.n_leads, rec.length)


def dequantize(sym: SymbolSequence, fs: float = 250.0, leads=None) -> EcgRecord:
    """Bin centres ``(bin + 0.5) / 26`` reshaped back to (C, L)."""
    codes = np.frombuffer(sym.symbols.encode("ascii"), dtype=np.uint8).astype(np.int64) - ord("a")
    values = (codes + 0.5) / N_BINS
    if leads is None:
        leads = LEAD_ORDER[: sym.n_leads]
    return EcgRecord(tuple(leads), fs, values.reshape(sym.n_leads, sym.length))
