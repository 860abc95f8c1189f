"""Exact idèle-theoretic normal forms for locally free class groups and relative K-groups of orders."""

__version__ = "0.1.0"
