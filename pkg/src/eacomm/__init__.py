"""Exact simulation and certification of entanglement-assisted two-party protocols."""

__version__ = "0.1.0"
