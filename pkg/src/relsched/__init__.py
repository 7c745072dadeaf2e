"""Exact-rational makespan scheduling toolkit for uniformly related machines."""

__version__ = "0.1.0"
