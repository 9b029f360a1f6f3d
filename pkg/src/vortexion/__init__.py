"""Numerical engine for the vortex-exciton protected qubit."""

__version__ = "0.1.0"
