"""Exact arithmetic in the ring of divided-power differential operators over F_p."""

from .field import FieldError, Prime, Scalar, binom_mod_p, digits, multi_binom
from .ring import DiffOp, DRing, Poly, ShapeError, apply, commutator, equals_via_action, mul

__version__ = "0.1.0"

__all__ = [
    "DRing",
    "DiffOp",
    "FieldError",
    "Poly",
    "Prime",
    "Scalar",
    "ShapeError",
    "apply",
    "binom_mod_p",
    "commutator",
    "digits",
    "equals_via_action",
    "multi_binom",
    "mul",
]
