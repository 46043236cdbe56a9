"""Socratic topic resolution over Knowledge Organization Systems."""

__version__ = "0.1.0"
