"""Learned and classical bit-flipping decoders for binary linear block codes."""

__version__ = "0.1.0"
