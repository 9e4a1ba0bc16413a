"""Exact-arithmetic experiments on badly approximable vectors and subspaces."""

__version__ = "0.1.0"
