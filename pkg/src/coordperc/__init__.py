"""Coordinate percolation for scheduling two random walks on a complete graph."""
from .kernels import IMPLEMENTATION
from .model import DomainError, Sequence, generate, read_sequence
from .params import PRESETS, Params, ValidationReport, load_params, scale, validate
from .reachability import (
    Rect,
    cc_connected,
    cs_connected,
    reach,
    sc_connected,
    ss_connected,
    survival_depth,
)
from .scheduler import Schedule, extract_schedule, find_path, verify_schedule

__version__ = "0.1.0"

__all__ = [
    "IMPLEMENTATION",
    "DomainError",
    "PRESETS",
    "Params",
    "Rect",
    "Schedule",
    "Sequence",
    "ValidationReport",
    "cc_connected",
    "cs_connected",
    "extract_schedule",
    "find_path",
    "generate",
    "load_params",
    "reach",
    "read_sequence",
    "sc_connected",
    "scale",
    "ss_connected",
    "survival_depth",
    "validate",
    "verify_schedule",
]
