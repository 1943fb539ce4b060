"""Numerical verification of dual, alpha, and generalized-bundle
connection identities on coordinate charts."""

__version__ = "0.1.0"
