"""Quantitative emotion, color, temporal and spatial statistics over
painting corpora."""

__version__ = "0.1.0"
