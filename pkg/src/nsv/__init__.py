"""Discover intrinsic dimension and neural state variables from rendered video."""

__version__ = "0.1.0"
