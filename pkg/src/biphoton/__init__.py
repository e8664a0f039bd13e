"""Polarization-entangled photon pairs from two coupled quantum emitters."""
__version__ = "0.1.0"
