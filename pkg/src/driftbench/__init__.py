"""Drift-based dataset stability benchmarking with importance-weighted drift detection."""

__version__ = "0.1.0"
