"""Exact action spectra, barcodes and boundary-depth certificates for radial PL profiles."""

from .core import INF, ManifoldParams, PLProfile, Quantity, make_profile

__all__ = ["INF", "ManifoldParams", "PLProfile", "Quantity", "make_profile"]
__version__ = "0.1.0"
