"""Exact computation of relative Hochschild and cyclic homology.

For a square-zero extension E = A (+) M of a finite-dimensional algebra by a
bimodule twisted by a normal 2-cocycle, this package computes HH_*(E, M) and
HC_*(E, M) two independent ways — from small tensor complexes built out of
(A, M, f) directly, and from the normalized bar-complex oracle — and verifies
the structural identities relating all the operators involved (rotation,
norm, cocycle insertions, Karoubi operator, harmonic projection, periodicity)
as exact matrix equations over the rationals.
"""

__version__ = "0.1.0"
