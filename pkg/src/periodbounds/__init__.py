"""Minimal periods of Lipschitz ODEs in l^p and L^p spaces."""

__version__ = "0.1.0"
