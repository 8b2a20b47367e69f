"""Squeezed-cat bosonic code simulation."""

__version__ = "0.1.0"
