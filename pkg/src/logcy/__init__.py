"""Exact-arithmetic geometry of positive log Calabi-Yau surface pairs.

Integral affine manifolds with one singularity, polygon compactifications,
scattering diagrams and broken lines, central-fiber Euler characteristics,
and symbolic periods of tropical 1-cycles.
"""

__version__ = "0.1.0"
