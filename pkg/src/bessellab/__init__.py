"""Numerical laboratory for Bessel moments, their determinants and Wronskians."""

__version__ = "0.1.0"
