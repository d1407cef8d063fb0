"""Standardized Kalman filtering and RTS smoothing for EEG source imaging."""

__version__ = "0.1.0"
