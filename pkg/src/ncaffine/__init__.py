"""Exact computations for noncommutative affine schemes presented by convolution
representations: coalgebras in bimodules, cyclic objects with coefficients,
Galois and Morita checks, and infinitesimal towers."""

__version__ = "0.1.0"
