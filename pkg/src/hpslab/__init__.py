"""Hamiltonian phase states: construction, compilation, certification and protocol simulation."""

__version__ = "0.1.0"
