"""Numerical lab for the quantized baker's map on the torus."""

__version__ = "0.1.0"
