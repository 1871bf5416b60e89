"""Toolkit for designing, validating, and using cuboid shape-abstraction libraries."""

__version__ = "0.1.0"
