"""Randomized benchmarking of single qubits: simulation and analysis."""

__version__ = "0.1.0"
