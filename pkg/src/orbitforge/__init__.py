"""Periodic-orbit machinery for hyperbolic triangular maps and singular flows."""

__version__ = "0.1.0"
