"""Exact and limiting constructions of the multiplicative coalescent."""
from .core import (ClockFamily, DegenerateRateError, MassVector, OrderedLengths, Partition,
                   draw_clocks, moments, stream_rng)

__all__ = ["ClockFamily", "DegenerateRateError", "MassVector", "OrderedLengths", "Partition",
           "draw_clocks", "moments", "stream_rng"]
__version__ = "0.1.0"
