"""Periodic p-harmonic functions on the Cayley tree, via its group G_k."""

from ._backend import BACKEND
from .word_group import ReducedWord, ball, distance, inverse, multiply, neighbors, reduce

__all__ = ["BACKEND", "ReducedWord", "ball", "distance", "inverse", "multiply", "neighbors", "reduce"]
__version__ = "0.1.0"
