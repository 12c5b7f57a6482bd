"""Spectral lower bounds for Schrodinger operators on model Ricci shrinkers."""
__version__ = "0.1.0"
