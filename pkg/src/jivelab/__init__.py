"""Shared-subspace estimation under the JIVE model."""

__version__ = "0.1.0"
