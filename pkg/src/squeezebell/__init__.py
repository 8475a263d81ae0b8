"""Squeezing-enhanced linear-optical Bell measurements: simulation and analysis."""

__version__ = "0.1.0"
