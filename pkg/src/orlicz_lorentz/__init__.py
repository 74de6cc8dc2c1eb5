"""Orlicz-Lorentz modulars, the envelope functional P and verification oracles."""

from .core import INF, StepFn, integrate, pointwise_compose, seq_to_step, step_to_seq
from .orlicz import Expm1, OrliczFn, PiecewiseLinear, Power
from .weights import Weight
from .verdict import Verdict

__all__ = [
    "INF",
    "StepFn",
    "integrate",
    "pointwise_compose",
    "seq_to_step",
    "step_to_seq",
    "OrliczFn",
    "Power",
    "Expm1",
    "PiecewiseLinear",
    "Weight",
    "Verdict",
]

__version__ = "0.1.0"
