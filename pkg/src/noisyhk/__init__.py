"""noisyhk: noisy Hegselmann-Krause opinion dynamics simulator."""

__version__ = "0.1.0"
