"""Leakage-aware offline evaluation harness for top-N recommenders."""

__version__ = "0.1.0"

from leakproof.corpus import Dataset, Interaction

__all__ = ["Dataset", "Interaction", "__version__"]
