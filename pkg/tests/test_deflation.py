"""Tests for first-order deflation."""
from __future__ import annotations
from fractions import Fraction
import numpy as np
import pytest

from multroot import systems
from multroot.deflation import (adjugate, deflate_fully, deflate_once, determinant, kernel_forms, polish,
                                random_weights)
from multroot.dual import compute_dual_space
from multroot.errors import NumericalError, ShapeError, SimpleRootError
from multroot.poly import MPoly, evaluate_matrix, evaluate_system, jacobian
from multroot.refine import verify_simple_root


def _illustrative():
    x1, x2 = MPoly.variable(2, 0), MPoly.variable(2, 1)
    return [x1 + x2 ** 2, x1 ** 2 + x2 ** 2], (0, 0)


# ─── Exact determinants ───────────────────────────────────────────────────────
class TestDeterminant:
    def test_three_by_three(self):
        """det [[2,0,1],[1,3,2],[1,1,1]] = 2(3−2) + 1(1−3) = 0"""
        c = lambda v: MPoly.constant(1, v)
        A = [[c(2), c(0), c(1)], [c(1), c(3), c(2)], [c(1), c(1), c(1)]]
        assert determinant(A, 1, "QQ").is_zero()

    def test_adjugate_identity(self):
        """A · adj(A) = det(A) · I for a polynomial 2×2 block."""
        x = MPoly.variable(1, 0)
        one = MPoly.constant(1, 1)
        A = [[x, one], [one.scale(2), x ** 2]]
        adj = adjugate(A, 1, "QQ")
        det = determinant(A, 1, "QQ")
        for i in range(2):
            for j in range(2):
                prod = A[i][0] * adj[0][j] + A[i][1] * adj[1][j]
                assert prod == (det if i == j else MPoly.zero(1))


# ─── Kernel forms ─────────────────────────────────────────────────────────────
class TestKernelForms:
    def test_illustrative_form(self):
        """Λ^x = −2x2 ∂1 + ∂2."""
        F, xi = _illustrative()
        (form,) = kernel_forms(F, xi)
        assert form.coefficients[0] == MPoly(2, {(0, 1): -2})
        assert form.coefficients[1] == MPoly.constant(2, 1)
        assert form.column == 1

    def test_forms_lie_in_the_kernel(self):
        s = systems.load("caprasse")
        forms = kernel_forms(s.polynomials, s.root)
        J = evaluate_matrix(jacobian(s.polynomials), s.root)
        assert len(forms) == 2
        for form in forms:
            v = form.at(s.root)
            assert np.linalg.norm(v) > 1e-6
            assert np.linalg.norm(J @ v) <= 1e-8 * np.linalg.norm(v)

    def test_simple_root_has_nothing_to_deflate(self):
        x1, x2 = MPoly.variable(2, 0), MPoly.variable(2, 1)
        with pytest.raises(SimpleRootError):
            kernel_forms([x1, x2], (0, 0))


# ─── One step ─────────────────────────────────────────────────────────────────
class TestDeflateOnce:
    def test_illustrative(self):
        """{x1+x2², x1²+x2², −4x1x2+2x2}; Λ(f1) = 0 is dropped."""
        F, xi = _illustrative()
        out = deflate_once(F, xi)
        assert out == (F[0], F[1], MPoly(2, {(1, 1): -4, (0, 1): 2}))
        assert all(c.denominator == 1 for p in out for c in p.terms.values())
        assert verify_simple_root(out, xi).simple

    def test_i_set_out_of_range(self):
        F, xi = _illustrative()
        with pytest.raises(ShapeError, match="out of range"):
            deflate_once(F, xi, i_set=(1,))

    def test_weights_length(self):
        F, xi = _illustrative()
        with pytest.raises(ShapeError, match="weights"):
            deflate_once(F, xi, weights=[1, 2])

    @pytest.mark.parametrize("name", ["illustrative", "multi_iter_2", "multi_iter_3", "caprasse", "family:3"])
    def test_multiplicity_and_nil_index_drop(self, name):
        s = systems.load(name)
        before = compute_dual_space(s.polynomials, s.root)
        after = compute_dual_space(deflate_once(s.polynomials, s.root), s.root)
        assert after.multiplicity < before.multiplicity
        assert after.nil_index < before.nil_index


# ─── Full deflation ───────────────────────────────────────────────────────────
class TestDeflateFully:
    def test_illustrative_trace(self):
        F, xi = _illustrative()
        trace = deflate_fully(F, xi)
        assert trace.iterations == 1
        assert trace.ranks == (1, 2)
        assert trace.appended == (1,)
        assert len(trace.final) == 3

    @pytest.mark.parametrize("name, polys, nvars, iterations", [
        ("multi_iter_1", 16, 4, 2),
        ("multi_iter_3", 6, 2, 4),
        ("caprasse", 6, 4, 1),
    ])
    def test_suite_counts(self, name, polys, nvars, iterations):
        s = systems.load(name)
        trace = deflate_fully(s.polynomials, s.root)
        assert (len(trace.final), s.nvars, trace.iterations) == (polys, nvars, iterations)
        assert trace.ranks[-1] == nvars

    def test_two_kernel_forms_are_combined(self):
        """Corank 2: one random combination adds N − r = 2 equations and finishes."""
        s = systems.load("caprasse")
        trace = deflate_fully(s.polynomials, s.root)
        assert trace.ranks == (2, 4)
        assert trace.appended == (2,)

    def test_first_column_only_still_ends_simple(self):
        s = systems.load("caprasse")
        trace = deflate_fully(s.polynomials, s.root, strategy="first")
        assert trace.iterations <= compute_dual_space(s.polynomials, s.root).nil_index
        assert verify_simple_root(trace.final, trace.points[-1]).simple

    def test_breadth_one_adds_one_per_step(self):
        """The block survives every step, so old rows only reproduce earlier additions."""
        s = systems.load("multi_iter_3")
        trace = deflate_fully(s.polynomials, s.root)
        assert trace.appended == (1, 1, 1, 1)
        assert trace.ranks == (1, 1, 1, 1, 2)
        assert len(set(trace.blocks)) == 1

    @pytest.mark.parametrize("name", ["illustrative", "multi_iter_1", "multi_iter_2", "multi_iter_3", "caprasse"])
    def test_added_equations_bounded(self, name):
        """|i| = 1: at most N − r new equations per step."""
        s = systems.load(name)
        trace = deflate_fully(s.polynomials, s.root)
        for k, added in enumerate(trace.appended):
            assert 1 <= added <= len(trace.systems[k]) - trace.ranks[k]
            assert len(trace.systems[k + 1]) == len(trace.systems[k]) + added

    @pytest.mark.parametrize("name", ["illustrative", "multi_iter_2", "caprasse", "family:3"])
    def test_added_equations_vanish_at_root(self, name):
        s = systems.load(name)
        out = deflate_once(s.polynomials, s.root)
        new = out[len(s.polynomials):]
        assert new
        for p in new:
            assert abs(p.evaluate(s.root)) <= 1e-8 * max(1.0, p.coefficient_scale())

    def test_multi_iter_2_ends_simple(self):
        s = systems.load("multi_iter_2")
        trace = deflate_fully(s.polynomials, s.root)
        assert trace.ranks[-1] == 3
        assert verify_simple_root(trace.final, trace.points[-1]).simple

    @pytest.mark.slow
    def test_multi_iter_4_ends_simple(self):
        s = systems.load("multi_iter_4")
        trace = deflate_fully(s.polynomials, s.root)
        assert trace.iterations <= 7
        assert verify_simple_root(trace.final, trace.points[-1], tol=1e-6).simple

    def test_iterations_bounded_by_nil_index(self):
        s = systems.load("multi_iter_2")
        trace = deflate_fully(s.polynomials, s.root)
        assert trace.iterations <= compute_dual_space(s.polynomials, s.root).nil_index

    def test_iteration_cap(self):
        s = systems.load("multi_iter_2")
        with pytest.raises(NumericalError, match="still singular"):
            deflate_fully(s.polynomials, s.root, max_iter=1)

    def test_unknown_strategy(self):
        F, xi = _illustrative()
        with pytest.raises(ShapeError, match="strategy"):
            deflate_fully(F, xi, strategy="best")

    def test_same_seed_same_system(self):
        s = systems.load("multi_iter_1")
        a = deflate_fully(s.polynomials, s.root, seed=5).final
        b = deflate_fully(s.polynomials, s.root, seed=5).final
        assert a == b


# ─── Helpers ──────────────────────────────────────────────────────────────────
class TestHelpers:
    def test_random_weights_are_small_nonzero_rationals(self):
        w = random_weights(np.random.default_rng(0), 50)
        assert all(isinstance(v, Fraction) and v != 0 for v in w)
        assert all(1 <= abs(v.numerator) <= 9 and 1 <= v.denominator <= 9 for v in w)

    def test_polish_never_increases_residual(self):
        s = systems.load("multi_iter_3")
        start = [1.5055, 0.36528]
        r0 = np.linalg.norm(evaluate_system(s.polynomials, start))
        x = polish(s.polynomials, start, steps=5)
        assert np.linalg.norm(evaluate_system(s.polynomials, x)) <= r0
