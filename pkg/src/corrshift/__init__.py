"""Correlation regime-change analysis around a dated market event."""

__version__ = "0.1.0"
