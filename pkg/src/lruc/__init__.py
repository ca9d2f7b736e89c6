"""Local randomizing unitary channels: sampling, certification and experiments."""

__version__ = "0.1.0"
