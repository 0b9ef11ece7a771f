"""Pulse-wave propagation in arterial networks with sparse-grid uncertainty quantification."""

__version__ = "0.1.0"
