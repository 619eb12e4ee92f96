"""Confidence intervals for occupancy probabilities via Turing's estimator."""

__version__ = "0.1.0"
