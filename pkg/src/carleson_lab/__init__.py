"""Numerical laboratory for discrete polynomial-type Carleson operators.

Exponential sums along floor(n^c), oscillatory multipliers and their
continuous counterparts, truncated maximal operators, ergodic averages,
r-variation, TT* kernel probes and a reproducible sweep harness.
"""
__version__ = "0.1.0"

from .core_math import DomainError, NumericError, ParamSet, SignHalf, SignMode  # noqa: E402,F401
