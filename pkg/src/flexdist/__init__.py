"""Flexible univariate distributions: skew-symmetric, transformation-based,
and two-piece families, with fitting, model selection, and bootstrap tests.
"""

__version__ = "0.1.0"
