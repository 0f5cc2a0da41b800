"""ECG record type and lead canonicalization."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .exceptions import (
    DuplicateLead,
    MissingLead,
    NonFiniteSample,
    UnknownLead,
    ValidationError,
)

#: PTB-XL lead order used everywhere downstream.
LEAD_ORDER: tuple[str, ...] = (
    "I", "II", "III", "aVL", "aVR", "aVF", "V1", "V2", "V3", "V4", "V5", "V6",
)

_LEAD_ALIASES = {name.upper(): name for name in LEAD_ORDER}


def canonical_lead_name(name: str) -> str:
    """Map a lead label onto its canonical spelling (``AVR`` -> ``aVR``)."""
    key = str(name).strip().upper()
    try:
        return _LEAD_ALIASES[key]
    except KeyError:
        raise UnknownLead(f"not a standard 12-lead identifier: {name!r}") from None


@dataclass(frozen=True, eq=False)
class EcgRecord:
    """A C x L matrix of lead samples (millivolts) at sampling rate ``fs``.

    Instances are immutable: ``samples`` is stored as a read-only float64
    array, so records can be shared freely between threads.
    """

    leads: tuple[str, ...]
    fs: float
    samples: np.ndarray
    source_id: str = field(default="")

    def __post_init__(self):
        leads = tuple(canonical_lead_name(name) for name in self.leads)
        if len(set(leads)) != len(leads):
            dup = sorted({n for n in leads if leads.count(n) > 1})
            raise DuplicateLead(f"duplicate leads: {dup}")
        samples = np.array(self.samples, dtype=np.float64, copy=True)
        if samples.ndim == 1:
            samples = samples[np.newaxis, :]
        if samples.ndim != 2:
            raise ValidationError(f"samples must be 2-D (C, L), got shape {samples.shape}")
        if samples.shape[0] != len(leads):
            raise ValidationError(
                f"{len(leads)} lead names for {samples.shape[0]} sample rows"
            )
        if samples.shape[1] < 1:
            raise ValidationError("record must contain at least one sample per lead")
        if not np.all(np.isfinite(samples)):
            raise NonFiniteSample("samples contain NaN or Inf")
        fs = float(self.fs)
        if not np.isfinite(fs) or fs <= 0:
            raise ValidationError(f"sampling rate must be positive, got {self.fs!r}")
        samples.flags.writeable = False
        object.__setattr__(self, "leads", leads)
        object.__setattr__(self, "fs", fs)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "source_id", str(self.source_id))

    @property
    def n_leads(self) -> int:
        return self.samples.shape[0]

    @property
    def length(self) -> int:
        return self.samples.shape[1]

    @property
    def duration(self) -> float:
        return self.length / self.fs

    def with_samples(self, samples, fs: float | None = None) -> "EcgRecord":
        """Copy of this record with new sample data (and optionally a new rate)."""
        return replace(self, samples=samples, fs=self.fs if fs is None else fs)

    def __eq__(self, other):
        if not isinstance(other, EcgRecord):
            return NotImplemented
        return (
            self.leads == other.leads
            and self.fs == other.fs
            and self.samples.shape == other.samples.shape
            and bool(np.array_equal(self.samples, other.samples))
        )

    __hash__ = None

    def __repr__(self):
        return (
            f"EcgRecord(n_leads={self.n_leads}, length={self.length}, "
            f"fs={self.fs:g}, source_id={self.source_id!r})"
        )


def check_complete_leads(leads: Sequence[str]) -> None:
    """Raise unless ``leads`` is exactly the canonical 12-lead set (any order)."""
    names = [canonical_lead_name(n) for n in leads]
    if len(set(names)) != len(names):
        raise DuplicateLead(f"duplicate leads in {names}")
    missing = [n for n in LEAD_ORDER if n not in names]
    if missing:
        raise MissingLead(f"missing leads: {missing}")


def reorder_leads(rec: EcgRecord, target: Sequence[str] = LEAD_ORDER) -> EcgRecord:
    """Permute rows of ``rec`` so its leads follow ``target``."""
    check_complete_leads(rec.leads)
    target = tuple(canonical_lead_name(n) for n in target)
    check_complete_leads(target)
    if rec.leads == target:
        return rec
    index = [rec.leads.index(name) for name in target]
    return replace(rec, leads=target, samples=rec.samples[index])
