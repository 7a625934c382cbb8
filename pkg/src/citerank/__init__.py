"""Static ranking of papers from a citation graph."""

__version__ = "0.1.0"
