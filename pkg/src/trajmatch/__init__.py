"""Demonstration-guided trajectory matching and reward shaping."""

__version__ = "0.1.0"
