"""Exact construction and certification of unextendible product and biseparable bases."""

__version__ = "0.1.0"
