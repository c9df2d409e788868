"""Pseudospectral toolkit for the non-relativistic limit of the cubic
Klein-Gordon equation: modulated-expansion profiles, oscillatory solvers,
and convergence-rate experiments on periodic boxes."""

__version__ = "0.1.0"
