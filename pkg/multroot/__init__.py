"""
multroot: multiplicity structure and deflation of isolated singular roots.

    poly        sparse polynomials over QQ / CC, dual functionals
    linalg      SVD ranks and null spaces, echelon forms, pivoted blocks
    dual        Macaulay dual space, δ, o, orthogonal primal–dual pair
    deflation   first-order differential deflation
    multmatrix  parametric multiplication matrices and the (z, μ) system
    refine      square subsystems, damped Newton, simple-root check
"""
from .errors import (BasisError, DomainMismatchError, MultrootError, NumericalError, ParseError, ShapeError,
                     SimpleRootError)
from .poly import CC, QQ, DualElement, MPoly, jacobian
from .dual import compute_dual_space, orthogonal_primal_dual
from .deflation import deflate_fully, deflate_once, kernel_forms
from .multmatrix import build_deflated_system, exponent_sets
from .refine import newton_refine, random_square_subsystem, verify_simple_root

__version__ = "0.1.0"

__all__ = [
    "BasisError", "DomainMismatchError", "MultrootError", "NumericalError", "ParseError", "ShapeError",
    "SimpleRootError", "CC", "QQ", "DualElement", "MPoly", "jacobian", "compute_dual_space",
    "orthogonal_primal_dual", "deflate_fully", "deflate_once", "kernel_forms", "build_deflated_system",
    "exponent_sets", "newton_refine", "random_square_subsystem", "verify_simple_root",
]
