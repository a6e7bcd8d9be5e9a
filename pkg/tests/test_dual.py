"""Tests for the Macaulay dual space and the orthogonal primal–dual pair."""
from __future__ import annotations
from fractions import Fraction
import numpy as np
import pytest

from multroot import systems
from multroot.dual import (compute_dual_space, dual_residual, is_connected_to_one, macaulay_matrix,
                           orthogonal_primal_dual)
from multroot.errors import BasisError, NumericalError, ShapeError
from multroot.poly import MPoly, exp_factorial, monomials_upto, sub_exp


def _illustrative():
    x1, x2 = MPoly.variable(2, 0), MPoly.variable(2, 1)
    return [x1 + x2 ** 2, x1 ** 2 + x2 ** 2], (0, 0)


def _exact_dimension(F, xi, t) -> int:
    """dim of the order-t dual space by Fraction elimination on the scaled Macaulay matrix."""
    n = F[0].nvars
    shifted = [f.shift(xi) for f in F]
    cols = monomials_upto(n, t)
    rows = []
    for g in shifted:
        for beta in monomials_upto(n, max(t - 1, 0)):
            row = []
            for gamma in cols:
                d = sub_exp(gamma, beta)
                row.append(Fraction(g.terms.get(d, 0)) if d is not None else Fraction(0))
            rows.append(row)
    rank = 0
    ncols = len(cols)
    for c in range(ncols):
        pivot = next((r for r in range(rank, len(rows)) if rows[r][c] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        for r in range(len(rows)):
            if r != rank and rows[r][c] != 0:
                k = rows[r][c] / rows[rank][c]
                rows[r] = [a - k * b for a, b in zip(rows[r], rows[rank])]
        rank += 1
    return ncols - rank


# ─── Multiplicity and nil-index ───────────────────────────────────────────────
class TestComputeDualSpace:
    def test_illustrative(self):
        """Double root: δ = 2, o = 1, D_t dimensions 1, 2, 2."""
        F, xi = _illustrative()
        D = compute_dual_space(F, xi)
        assert (D.multiplicity, D.nil_index) == (2, 1)
        assert D.dimensions == (1, 2, 2)
        assert D.breadth == 1

    @pytest.mark.parametrize("name, delta, o", [
        ("multi_iter_2", 16, 7),
        ("multi_iter_3", 5, 4),
        ("multi_iter_4", 18, 7),
    ])
    def test_suite(self, name, delta, o):
        s = systems.load(name)
        D = compute_dual_space(s.polynomials, s.root)
        assert (D.multiplicity, D.nil_index) == (delta, o)

    def test_multi_iter_1(self):
        """δ = 131, o = 10 at the origin of the four quartics."""
        s = systems.load("multi_iter_1")
        D = compute_dual_space(s.polynomials, s.root)
        assert (D.multiplicity, D.nil_index) == (131, 10)

    def test_caprasse(self):
        s = systems.load("caprasse")
        D = compute_dual_space(s.polynomials, s.root)
        assert D.multiplicity == 4
        assert D.breadth == 2

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_family_is_2_to_the_n(self, n):
        """δ = 2^n, o = 2^(n−1), breadth 2."""
        s = systems.gen_family(n)
        D = compute_dual_space(s.polynomials, s.root)
        assert D.multiplicity == 2 ** n
        assert D.nil_index == 2 ** (n - 1)
        assert D.breadth == 2

    def test_not_a_root(self):
        F, _ = _illustrative()
        with pytest.raises(NumericalError, match="does not annihilate"):
            compute_dual_space(F, (1, 0))

    def test_point_length(self):
        F, _ = _illustrative()
        with pytest.raises(ShapeError):
            compute_dual_space(F, (0, 0, 0))

    def test_order_cap(self):
        """x⁵ has o = 4; capping the order at 2 cannot see it stabilise."""
        x = MPoly.variable(1, 0)
        with pytest.raises(NumericalError, match="still growing"):
            compute_dual_space([x ** 5], (0,), t_max=2)


# ─── Exact oracle ─────────────────────────────────────────────────────────────
class TestExactOracle:
    @pytest.mark.parametrize("name", ["illustrative", "multi_iter_2", "family:2", "family:3"])
    def test_dimensions_match_fraction_elimination(self, name):
        s = systems.load(name)
        D = compute_dual_space(s.polynomials, s.root)
        exact = tuple(_exact_dimension(s.polynomials, s.root, t) for t in range(D.nil_index + 2))
        assert D.dimensions == exact


# ─── Macaulay matrix ──────────────────────────────────────────────────────────
class TestMacaulayMatrix:
    def test_scaling(self):
        """Unscaled columns are γ! times the scaled ones."""
        F, xi = _illustrative()
        A = macaulay_matrix(F, xi, 2)
        B = macaulay_matrix(F, xi, 2, scaled=True)
        weights = np.array([exp_factorial(g) for g in monomials_upto(2, 2)])
        assert np.allclose(A, B * weights)

    def test_shape(self):
        """Order 2: rows = 2 polys × 3 shifts, columns = 6 monomials."""
        F, xi = _illustrative()
        assert macaulay_matrix(F, xi, 2).shape == (6, 6)
        assert macaulay_matrix(F, xi, 0).shape == (2, 1)


# ─── Primal–dual pair ─────────────────────────────────────────────────────────
class TestOrthogonalPrimalDual:
    def test_illustrative_basis(self):
        """E = {1, x2}; Λ_0 = evaluation, Λ_1 = ∂2."""
        F, xi = _illustrative()
        P = orthogonal_primal_dual(compute_dual_space(F, xi))
        assert P.exponents == ((0, 0), (0, 1))
        assert P.nu((0, 1), (0, 1)) == pytest.approx(1)
        assert P.nu((0, 1), (1, 0)) == pytest.approx(0, abs=1e-12)
        assert P.basis[0].pairing((0, 0)) == pytest.approx(1)

    @pytest.mark.parametrize("name", ["caprasse", "multi_iter_2", "family:3"])
    def test_orthogonality(self, name):
        """Λ_i((x−ξ)^{α_j}) = δ_ij."""
        s = systems.load(name)
        P = orthogonal_primal_dual(compute_dual_space(s.polynomials, s.root))
        G = np.array([[L.pairing(a) for a in P.exponents] for L in P.basis])
        assert np.allclose(G, np.eye(P.multiplicity), atol=1e-8)
        assert is_connected_to_one(P.exponents)

    def test_user_basis_for_caprasse(self):
        s = systems.load("caprasse")
        E = ((0, 0, 0, 0), (1, 0, 0, 0), (0, 1, 0, 0), (1, 1, 0, 0))
        P = orthogonal_primal_dual(compute_dual_space(s.polynomials, s.root), E)
        assert set(P.exponents) == set(E)
        G = np.array([[L.pairing(a) for a in P.exponents] for L in P.basis])
        assert np.allclose(G, np.eye(4), atol=1e-8)

    def test_user_basis_not_a_basis(self):
        """x1 is zero in the local ring of the illustrative root."""
        F, xi = _illustrative()
        with pytest.raises(BasisError, match="not a basis"):
            orthogonal_primal_dual(compute_dual_space(F, xi), [(0, 0), (1, 0)])

    def test_user_basis_not_connected(self):
        F, xi = _illustrative()
        with pytest.raises(BasisError, match="connected"):
            orthogonal_primal_dual(compute_dual_space(F, xi), [(0, 0), (0, 2)])

    def test_user_basis_wrong_size(self):
        F, xi = _illustrative()
        with pytest.raises(BasisError, match="multiplicity is 2"):
            orthogonal_primal_dual(compute_dual_space(F, xi), [(0, 0)])


# ─── Closedness ───────────────────────────────────────────────────────────────
class TestDualResidual:
    @pytest.mark.parametrize("name", ["illustrative", "multi_iter_2", "caprasse"])
    def test_basis_annihilates_the_ideal(self, name):
        s = systems.load(name)
        D = compute_dual_space(s.polynomials, s.root)
        assert dual_residual(D.basis, s.polynomials, D.nil_index) <= 1e-8

    def test_derivatives_stay_in_the_span(self):
        """d/d∂_i Λ of a dual element is again in D (closedness)."""
        s = systems.load("multi_iter_2")
        D = compute_dual_space(s.polynomials, s.root)
        cols = list(D.columns)
        V = np.asarray(D.values)
        for L in D.basis:
            for i in range(3):
                w = np.array([L.derivative(i).pairing(g) for g in cols])
                coeffs = np.linalg.lstsq(V.T, w, rcond=None)[0]
                assert np.linalg.norm(V.T @ coeffs - w) <= 1e-8 * max(1.0, np.linalg.norm(w))
