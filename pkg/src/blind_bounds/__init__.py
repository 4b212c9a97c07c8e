"""Blind-compression lower-bound workbench."""

__version__ = "0.1.0"
