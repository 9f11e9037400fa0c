"""Lindblad simulator for the two-spin qubot logical qubit."""

__version__ = "0.1.0"
