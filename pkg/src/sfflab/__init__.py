"""Spectral form factor laboratory for Wigner and monoparametric ensembles."""

__version__ = "0.1.0"
