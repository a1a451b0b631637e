"""Rydberg CZ gate synthesis and error analysis."""

__version__ = "0.1.0"
