"""Hybrid TDMA/CSMA medium-access simulator and scheduling library."""

__version__ = "0.1.0"
