from .bpe import (
    BpeVocab,
    TokenSequence,
    bpe_decode,
    bpe_encode,
    bpe_train,
    dumps_vocab,
    load_vocab,
    save_vocab,
)
from .files import read_symbols, read_tokens, write_symbols, write_tokens
from .quantize import ALPHABET, N_BINS, SymbolSequence, dequantize, quantize

__all__ = [
    "read_symbols",
    "read_tokens",
    "write_symbols",
    "write_tokens",
    "ALPHABET",
    "N_BINS",
    "BpeVocab",
    "SymbolSequence",
    "TokenSequence",
    "bpe_decode",
    "bpe_encode",
    "bpe_train",
    "dequantize",
    "dumps_vocab",
    "load_vocab",
    "quantize",
    "save_vocab",
]
