"""Numerical toolkit for log of the k-th principal-minor sum on augmented matrices."""
__version__ = "0.1.0"
