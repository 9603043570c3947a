"""Exact engine for mixed equivariant and monodromic parity computations."""

__version__ = "0.1.0"
