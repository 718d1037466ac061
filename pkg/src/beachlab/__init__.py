"""Numerical laboratory for 2D gravity water waves in a tank with a
pneumatic absorbing beach, with term-by-term audits of the integral
identities and energy-decay estimates underlying the damping analysis."""

__version__ = "0.1.0"
