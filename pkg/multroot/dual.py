"""
Local dual space of an isolated root, by Macaulay's dialytic construction.

For t = 0, 1, 2, … the truncated dual space D_t is the null space of the matrix with
columns ∂^γ (|γ| ≤ t) and rows (x−ξ)^β f_i (|β| ≤ max(t−1, 0)). Rows with |β| ≥ t
add nothing: since f_i(ξ) = 0, those products lie in m_ξ^{t+1}, which every functional
of order ≤ t already annihilates. The first t with dim D_{t+1} = dim D_t is the nil-index o.
At that point δ = dim D_o.

Outputs:
    DualSpaceResult  — δ, o, per-order dimensions, a basis of D
    PrimalDualPair   — exponents E of a primal basis {(x−ξ)^α} and the dual basis
                       orthogonal to it, with its table of pairing values ν
"""
from __future__ import annotations
import logging
from dataclasses import dataclass, field
from typing import Mapping, Sequence
import numpy as np

from .errors import BasisError, NumericalError, ShapeError
from .linalg import null_space, numerical_rank, reduced_row_echelon
from .poly import (DualElement, Exponent, MPoly, add_exp, common_shape, eorder_key, exp_factorial,
                   grevlex_key, monomials_upto, sub_exp, unit)


log = logging.getLogger("multroot.dual")


@dataclass(frozen=True)
class DualSpaceResult:
    """Basis of D = I^⊥ at ξ, with the data it was read from.

    `values[r, j]` is Λ_r((x−ξ)^{columns[j]}); columns cover |γ| ≤ o.
    """
    anchor: tuple[complex, ...]
    basis: tuple[DualElement, ...]
    multiplicity: int
    nil_index: int
    dimensions: tuple[int, ...]
    columns: tuple[Exponent, ...] = field(repr=False)
    values: np.ndarray = field(repr=False)

    @property
    def breadth(self) -> int:
        return self.dimensions[1] - 1 if len(self.dimensions) > 1 else 0


@dataclass(frozen=True)
class PrimalDualPair:
    """Primal exponents E (E-order, α_0 = 0) and the dual basis Λ_i with Λ_i((x−ξ)^{α_j}) = δ_ij."""
    anchor: tuple[complex, ...]
    exponents: tuple[Exponent, ...]
    basis: tuple[DualElement, ...]
    table: Mapping[tuple[Exponent, Exponent], complex] = field(repr=False)
    nil_index: int = 0

    @property
    def multiplicity(self) -> int:
        return len(self.exponents)

    def nu(self, alpha: Exponent, beta: Exponent) -> complex:
        """Λ_α((x−ξ)^β) for any β (zero beyond the order of Λ_α)."""
        try:
            i = self.exponents.index(tuple(alpha))
        except ValueError:
            raise BasisError(f"{alpha} is not in the primal exponent set") from None
        return self.basis[i].pairing(tuple(beta))


# ── Exponent-set checks ──────────────────────────────────────────────────────
def is_connected_to_one(E: Sequence[Exponent]) -> bool:
    """Every nonzero α in E has some α − e_i in E."""
    have = set(map(tuple, E))
    if not have:
        return False
    n = len(next(iter(have)))
    if (0,) * n not in have:
        return False
    for alpha in have:
        if sum(alpha) and not any(alpha[i] and sub_exp(alpha, unit(n, i)) in have for i in range(n)):
            return False
    return True


# ── Macaulay matrix ──────────────────────────────────────────────────────────
def macaulay_matrix(F: Sequence[MPoly], xi: Sequence, t: int, scaled: bool = False,
                    shifted: Sequence[MPoly] | None = None) -> np.ndarray:
    """Dialytic matrix of order t at ξ.

    Unscaled entries are ∂^γ((x−ξ)^β f_i)(ξ) = γ!·g_{γ−β}, where g are the Taylor
    coefficients of f_i at ξ. With `scaled=True` the γ! is left out, so null
    vectors come out as pairing values Λ((x−ξ)^γ).
    """
    n, _ = common_shape(F)
    if t < 0:
        raise ShapeError(f"order must be non-negative, got {t}")
    if len(xi) != n:
        raise ShapeError(f"point has {len(xi)} coordinates, system has {n} variables")
    if shifted is None:
        shifted = [f.shift(xi) for f in F]
    cols = monomials_upto(n, t)
    index = {g: j for j, g in enumerate(cols)}
    shifts = monomials_upto(n, max(t - 1, 0))

    M = np.zeros((len(F) * len(shifts), len(cols)), dtype=complex)
    for i, g in enumerate(shifted):
        base = i * len(shifts)
        for b, beta in enumerate(shifts):
            for e, c in g.terms.items():
                gamma = add_exp(beta, e)
                j = index.get(gamma)
                if j is not None:
                    M[base + b, j] = complex(c) if scaled else complex(c) * exp_factorial(gamma)
    return M


def compute_dual_space(F: Sequence[MPoly], xi: Sequence, tol: float = 1e-8, t_max: int = 16,
                       residual_tol: float = 1e-6) -> DualSpaceResult:
    """Grow D_t until it stabilises; δ = dim D_o, o = the first t with D_{t+1} = D_t."""
    n, _ = common_shape(F)
    if len(xi) != n:
        raise ShapeError(f"point has {len(xi)} coordinates, system has {n} variables")
    anchor = tuple(xi)
    shifted = [f.shift(anchor) for f in F]
    zero = (0,) * n
    residual = max(abs(complex(g.terms.get(zero, 0))) for g in shifted)
    scale = max(1.0, max(g.coefficient_scale() for g in shifted))
    if residual > residual_tol * scale:
        raise NumericalError(f"point does not annihilate the system: residual {residual:.3e}")

    dims: list[int] = []
    previous: tuple[np.ndarray, list[Exponent]] | None = None
    for t in range(t_max + 2):
        M = macaulay_matrix(F, anchor, t, scaled=True, shifted=shifted)
        cut = tol * max(1.0, float(np.abs(M).max()))
        K = null_space(M, cut)
        dims.append(K.shape[0])
        log.debug(f"order {t}: {M.shape[0]}×{M.shape[1]} Macaulay matrix, dim D_t = {dims[-1]}")
        if t > 0 and dims[-1] == dims[-2]:
            values, cols = previous
            o = t - 1
            basis = tuple(
                DualElement.from_pairings(anchor, {g: v for g, v in zip(cols, row) if v != 0})
                for row in values
            )
            log.info(f"dual space stabilised at t={o} (δ={len(basis)})")
            return DualSpaceResult(anchor=tuple(complex(v) for v in anchor), basis=basis,
                                   multiplicity=len(basis), nil_index=o, dimensions=tuple(dims),
                                   columns=tuple(cols), values=values)
        previous = (K, monomials_upto(n, t))
    raise NumericalError(
        f"dual space still growing at order {t_max + 1} (dimensions {dims}); "
        "the root may not be isolated at this tolerance"
    )


# ── Orthogonal primal–dual pair ──────────────────────────────────────────────
def orthogonal_primal_dual(D: DualSpaceResult, exponents: Sequence[Exponent] | None = None,
                           tol: float = 1e-8) -> PrimalDualPair:
    """Pick E by a descending-grevlex echelon form of D, or re-express D against a given E."""
    cols = list(D.columns)
    index = {g: j for j, g in enumerate(cols)}
    V = np.asarray(D.values, dtype=complex)
    delta = D.multiplicity

    if exponents is None:
        order = sorted(range(len(cols)), key=lambda j: grevlex_key(cols[j]), reverse=True)
        R, pivots = reduced_row_echelon(V, order, tol=tol)
        if len(pivots) != delta:
            raise NumericalError(f"dual basis has numerical rank {len(pivots)}, expected {delta}")
        E = [cols[j] for j in pivots]
        W = R[:delta]
        if not is_connected_to_one(E):
            raise NumericalError(f"leading exponents {E} are not connected to 1")
    else:
        E = [tuple(int(a) for a in alpha) for alpha in exponents]
        if any(len(alpha) != len(D.anchor) for alpha in E):
            raise BasisError(f"exponents {E} do not match {len(D.anchor)} variables")
        if len(E) != delta:
            raise BasisError(f"primal basis has {len(E)} elements, multiplicity is {delta}")
        if len(set(E)) != len(E):
            raise BasisError(f"duplicate exponents in {E}")
        if not is_connected_to_one(E):
            raise BasisError(f"exponent set {E} is not connected to 1")
        missing = [alpha for alpha in E if alpha not in index]
        if missing:
            raise BasisError(f"exponents {missing} exceed the nil-index {D.nil_index}")
        block = V[:, [index[alpha] for alpha in E]]
        if numerical_rank(block, rtol=tol).rank < delta:
            raise BasisError(f"{{(x−ξ)^α : α ∈ {E}}} is not a basis of the local quotient at this tolerance")
        W = np.linalg.solve(block, V)

    perm = sorted(range(delta), key=lambda i: eorder_key(E[i]))
    E = [E[i] for i in perm]
    W = W[perm]
    in_E = set(E)
    basis = tuple(
        DualElement.from_pairings(D.anchor, {g: v for g, v in zip(cols, row) if v != 0}) for row in W
    )
    table = {
        (alpha, beta): complex(W[i, index[beta]])
        for i, alpha in enumerate(E) for beta in cols if beta not in in_E
    }
    log.debug(f"primal exponents {E}")
    return PrimalDualPair(anchor=D.anchor, exponents=tuple(E), basis=basis, table=table,
                          nil_index=D.nil_index)


def dual_residual(basis: Sequence[DualElement], F: Sequence[MPoly], order: int) -> float:
    """max |Λ((x−ξ)^β f_i)| over the basis, the system and |β| ≤ order."""
    if not basis:
        return 0.0
    n, _ = common_shape(F)
    anchor = basis[0].anchor
    worst = 0.0
    for f in F:
        g = f.shift(anchor)
        for beta in monomials_upto(n, order):
            for L in basis:
                v = sum(c * exp_factorial(e) * complex(g.terms.get(sub_exp(e, beta), 0))
                        for e, c in L.terms.items() if sub_exp(e, beta) is not None)
                worst = max(worst, abs(v))
    return worst
