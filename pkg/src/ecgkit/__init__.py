"""ECG representation toolkit: preprocessing, symbolic BPE tokens, plots,
perturbations, language-model sample assembly and evaluation."""
__version__ = "0.1.0"

from .core import LEAD_ORDER, EcgRecord, canonical_lead_name, check_complete_leads, reorder_leads
from .exceptions import EcgKitError
from .io import read_record, write_record

__all__ = [
    "__version__",
    "LEAD_ORDER",
    "EcgRecord",
    "EcgKitError",
    "canonical_lead_name",
    "check_complete_leads",
    "reorder_leads",
    "read_record",
    "write_record",
]
