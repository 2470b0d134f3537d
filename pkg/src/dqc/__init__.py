"""Simulation and numerical checks for composable security of delegated quantum computation."""

__version__ = "0.1.0"
