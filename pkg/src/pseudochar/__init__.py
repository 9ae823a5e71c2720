"""Pseudocharacters on finitely presented groups and the quasi-trees they induce."""

__version__ = "0.1.0"
