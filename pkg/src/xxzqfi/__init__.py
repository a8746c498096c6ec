"""Quantum-RG and quantum Fisher information toolkit for the XXZ chain."""

__version__ = "0.1.0"
