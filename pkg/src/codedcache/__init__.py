"""Coded caching schemes and an exact converse for uncoded placement."""

__version__ = "0.1.0"
