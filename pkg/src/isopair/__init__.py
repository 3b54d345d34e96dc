"""Exact algebra and numerics for the Witt isotopic pair and its Verma-module representation."""

__version__ = "0.1.0"
