"""Successor maps, adiabatic invariants and orbit statistics for x'' + |x|^(alpha-1) x = p(t)."""

__version__ = "0.1.0"
