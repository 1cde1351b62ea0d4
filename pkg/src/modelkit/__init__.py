"""Numerics for model spaces of meromorphic inner functions and their multipliers."""

__version__ = "0.1.0"

from .errors import ModelkitError  # noqa: E402,F401
from .inner_core import (  # noqa: E402,F401
    ArithFamily,
    InnerFunctionSpec,
    TruncationSchedule,
    arg_on_line,
    arith,
    blaschke,
    derivative_modulus_on_line,
    eval_inner,
    reproducing_kernel,
    singular,
)
