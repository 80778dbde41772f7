"""Heine-Stieltjes polynomials, critical measures and quadratic differential trajectories."""
__version__ = "0.1.0"
