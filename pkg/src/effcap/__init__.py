"""Effective capacity of antenna-selection MIMO links under delay-QoS constraints."""
__version__ = "0.1.0"
