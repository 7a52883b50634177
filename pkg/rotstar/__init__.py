"""Distorted Lane-Emden functions and slowly rotating polytropes."""

from importlib import metadata

__version__ = metadata.version(__name__)
