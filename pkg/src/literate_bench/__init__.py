"""Evaluation and data-curation toolkit for document-reading models."""

__version__ = "0.1.0"
