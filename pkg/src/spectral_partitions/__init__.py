"""Spectral minimal partitions of weighted graphs via the signed partition Laplacian."""

__version__ = "0.1.0"
