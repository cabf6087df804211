"""Retrieval-augmented translation of natural-language questions into data-visualization queries (DVQs)."""

__version__ = "0.1.0"
