"""Numerical verification of weighted Sobolev and isoperimetric inequalities."""

__version__ = "0.1.0"
