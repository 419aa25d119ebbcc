"""Band-limited extension of one-sided sequences."""

__version__ = "0.1.0"
