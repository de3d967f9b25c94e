"""Hamiltonian stationary Lagrangian shrinkers and expanders in C^n.

Exact-derivative geometry of the Schoen-Wolfson cones and their resolving
self-similar flows, plus numerical certification of the Brakke inequality
across the t = 0 singular time.
"""

__version__ = "0.1.0"
