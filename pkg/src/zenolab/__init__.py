"""Numerical laboratory for quantum Zeno products of channels and semigroups."""

__version__ = "0.1.0"
