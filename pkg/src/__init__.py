# src/__init__.py
"""
psgoldbach - ternary Goldbach computations for Piatetski-Shapiro primes

Exact generation of primes in N^c = {floor(n^c)}, the W-tricked weight
systems and their exponential sums, and FFT verification that odd integers
are sums of three such primes.
"""

__version__ = "1.0.0"
__author__ = "psgoldbach developers"
