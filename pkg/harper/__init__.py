"""Circulant-plus-diagonal spectra, uncertainty bounds and random walks."""

__version__ = "1.0.0"
