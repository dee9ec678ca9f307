"""Convex extensions of jets and functions from compact convex bodies."""
__version__ = "0.1.0"
