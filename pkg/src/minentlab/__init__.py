"""Exact desk-scale simulation and verification of min-entropy uncertainty
bounds, privacy amplification, and bounded-storage two-party protocols."""

__version__ = "0.1.0"
