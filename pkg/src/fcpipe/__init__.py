"""Noise-aware functional-connectivity graph features with leave-one-out classification."""

__version__ = "0.1.0"
