"""Weak-quasisymmetric parametrization of discrete bounded-turning curves."""

__version__ = "0.1.0"
