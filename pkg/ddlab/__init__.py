"""
Doubly degenerate lab - numerical experiments for u_t = u^m div(|Du|^{p(x)-2} Du).
"""

__version__ = "0.1.0"
__author__ = "Doubly Degenerate Lab Team"

from ddlab.grid import ExponentField, Grid, ScalarField

__all__ = ["Grid", "ScalarField", "ExponentField", "__version__"]
