"""Variational quantum process tomography on a simulated photonic mesh processor."""

__version__ = "0.1.0"
