"""Coordinate-MLP fitting with input/output kernel transformations."""
__version__ = "0.1.0"
