"""Instrumented randomized incremental constructions and tail-bound checks."""

__version__ = "0.1.0"
