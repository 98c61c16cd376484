"""Connection matrices between z = 0 and z = 1 for generalized hypergeometric equations."""

__version__ = "0.1.0"

from .connection import connection_matrix_closed
from .equation import QUARTIC, QUINTIC, HypergeometricEquation, new_equation
from .oracle import ConnectionMatrix, numeric_connection

__all__ = [
    "ConnectionMatrix",
    "HypergeometricEquation",
    "QUARTIC",
    "QUINTIC",
    "connection_matrix_closed",
    "new_equation",
    "numeric_connection",
]
