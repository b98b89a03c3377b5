"""Numerical laboratory for the parabolic obstacle problem and melting-ice extinction rates."""

__version__ = "0.1.0"
