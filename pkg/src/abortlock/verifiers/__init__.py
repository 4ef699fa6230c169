"""Checkers for the invariant, descent, amortized-cost and trace properties."""

from .amortized import check_amortized_step, exceeds_proof_constant
from .invariant import Violation, check_invariant, check_mutex, i9_literal_diverges
from .monitor import MonitorState, initial_monitor, monitor_step
from .progress import (
    PC11_DIGIT,
    Distance,
    UndefinedDigit,
    check_lemma1,
    check_progress_step,
    delta,
    f_value,
    promoters,
)
from .trace import TraceError, TraceReport, analyze_trace

__all__ = [
    "PC11_DIGIT",
    "Distance",
    "MonitorState",
    "TraceError",
    "TraceReport",
    "UndefinedDigit",
    "Violation",
    "analyze_trace",
    "check_amortized_step",
    "check_invariant",
    "check_lemma1",
    "check_mutex",
    "check_progress_step",
    "delta",
    "exceeds_proof_constant",
    "f_value",
    "i9_literal_diverges",
    "initial_monitor",
    "monitor_step",
    "promoters",
]
