"""Rationality of fixed fields of two-dimensional quasi-monomial actions."""

__version__ = "0.1.0"
