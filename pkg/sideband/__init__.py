"""Sideband-resonance entangling gates for parametrically driven qubits in a cavity."""

__version__ = '0.3.0'
