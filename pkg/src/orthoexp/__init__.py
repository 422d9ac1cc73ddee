"""Orthogonal exponentials on convex polytopes and projected cubes."""

__version__ = "0.1.0"
