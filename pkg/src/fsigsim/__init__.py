"""Game-theoretic distributed channel allocation in frequency-selective networks."""

__version__ = "0.1.0"
