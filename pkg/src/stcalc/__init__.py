"""stcalc: numeric/symbolic spin-tensor calculus engine and verification CLI."""

__version__ = "0.1.0"
