"""Tests for system files, literals and JSON documents."""
from __future__ import annotations
import json
from fractions import Fraction
import numpy as np
import pytest

from multroot import systems
from multroot.errors import ParseError, ShapeError
from multroot.io import (_dumps, decode_coefficient, document, encode_coefficient, load_system_json, parse_basis,
                         parse_number, parse_polynomial, parse_system_text, poly_from_json, poly_to_json, write_json)
from multroot.poly import CC, QQ, MPoly, evaluate_system


# ─── Suite files ──────────────────────────────────────────────────────────────
class TestSuiteFiles:
    def test_illustrative(self):
        s = systems.load("illustrative")
        x1, x2 = MPoly.variable(2, 0), MPoly.variable(2, 1)
        assert s.names == ("x1", "x2")
        assert s.polynomials == (x1 + x2 ** 2, x1 ** 2 + x2 ** 2)
        assert s.root == (0, 0)
        assert s.domain == QQ
        assert s.basis is None

    def test_caprasse(self):
        """Integer coefficients stay exact; the root is complex; the basis line is read."""
        s = systems.load("caprasse")
        assert s.domain == QQ
        assert s.root[0] == 2
        assert s.root[1] == -1.7320508075688772j
        assert s.basis == ((0, 0, 0, 0), (1, 0, 0, 0), (0, 1, 0, 0), (1, 1, 0, 0))
        assert np.abs(evaluate_system(s.polynomials, s.root)).max() <= 1e-10

    def test_irrational_coefficients_make_cc(self):
        s = systems.load("multi_iter_3")
        assert s.domain == CC
        assert all(p.domain == CC for p in s.polynomials)
        assert np.abs(evaluate_system(s.polynomials, s.root)).max() <= 1e-9

    @pytest.mark.parametrize("name", ["multi_iter_1", "multi_iter_2", "multi_iter_4"])
    def test_roots_are_roots(self, name):
        s = systems.load(name)
        assert np.abs(evaluate_system(s.polynomials, s.root)).max() <= 1e-12

    def test_family(self):
        """n = 3: x1³+x1²−x2², x2³+x2²−x3, x3²."""
        s = systems.load("family:3")
        x1, x2, x3 = (MPoly.variable(3, i) for i in range(3))
        assert s.polynomials == (x1 ** 3 + x1 ** 2 - x2 ** 2, x2 ** 3 + x2 ** 2 - x3, x3 ** 2)
        assert len(s.basis) == 8

    def test_family_too_small(self):
        with pytest.raises(ShapeError):
            systems.gen_family(1)

    def test_missing_system(self):
        with pytest.raises(ParseError, match="no system"):
            systems.load("nope")

    def test_bad_family_size(self):
        with pytest.raises(ParseError):
            systems.load("family:x")


# ─── Parser errors ────────────────────────────────────────────────────────────
class TestParseErrors:
    def test_unknown_variable_position(self):
        """'w' sits at column 8 of line 2."""
        with pytest.raises(ParseError) as info:
            parse_system_text("vars: x y\nf: x + w\nroot: 0, 0\n")
        assert (info.value.line, info.value.column) == (2, 8)
        assert "unknown variable 'w'" in str(info.value)

    def test_malformed_complex_root(self):
        with pytest.raises(ParseError, match="malformed number") as info:
            parse_system_text("vars: x\nf: x^2\nroot: 1+2k\n")
        assert info.value.line == 3

    def test_root_length(self):
        with pytest.raises(ParseError, match="root has 1 components"):
            parse_system_text("vars: x y\nf: x\nroot: 0\n")

    def test_no_polynomials(self):
        with pytest.raises(ParseError, match="no polynomials"):
            parse_system_text("vars: x\nroot: 0\n")

    def test_missing_vars(self):
        with pytest.raises(ParseError, match="vars"):
            parse_system_text("f: x\nroot: 0\n")

    def test_unknown_key(self):
        with pytest.raises(ParseError, match="unknown key"):
            parse_system_text("vars: x\nequation: x\nroot: 0\n")

    def test_bad_character(self):
        with pytest.raises(ParseError, match="unexpected character"):
            parse_polynomial("x; y", ["x", "y"])

    def test_dunder_rejected(self):
        with pytest.raises(ParseError):
            parse_polynomial("x.__class__", ["x"])

    def test_not_a_polynomial(self):
        with pytest.raises(ParseError, match="not a polynomial"):
            parse_polynomial("1/x", ["x"])

    def test_unclosed_parenthesis(self):
        with pytest.raises(ParseError, match="cannot parse") as info:
            parse_system_text("vars: x\nf: (x + 1\nroot: 0\n")
        assert info.value.line == 2

    def test_imaginary_unit_rejected(self):
        """A bare I is not read as sqrt(-1)."""
        with pytest.raises(ParseError, match="unknown variable 'I'") as info:
            parse_system_text("vars: x y\nf: x + I\nroot: 0, 0\n")
        assert (info.value.line, info.value.column) == (2, 8)

    def test_variable_named_i(self):
        assert parse_polynomial("I*x", ["x", "I"]) == MPoly(2, {(1, 1): 1})

    def test_tolerances_read(self):
        s = parse_system_text("vars: x\nf: x^2\nroot: 0\ntol: 1e-9\nrank_tol: 1e-7\n")
        assert (s.tol, s.rank_tol) == (1e-9, 1e-7)


# ─── Literals ─────────────────────────────────────────────────────────────────
class TestLiterals:
    @pytest.mark.parametrize("text, value", [
        ("3", Fraction(3)),
        ("-1/2", Fraction(-1, 2)),
        ("0.25", 0.25),
        ("1e-3", 1e-3),
        ("1+2i", 1 + 2j),
        ("-1.5i", -1.5j),
        ("i", 1j),
        ("-i", -1j),
    ])
    def test_parse_number(self, text, value):
        got = parse_number(text)
        assert got == value
        assert type(got) is type(value)

    def test_zero_denominator(self):
        with pytest.raises(ParseError, match="zero denominator"):
            parse_number("1/0")

    def test_implicit_multiplication_and_xor(self):
        """'2x y^2' is 2·x·y²."""
        assert parse_polynomial("2x y^2", ["x", "y"]) == MPoly(2, {(1, 2): 2})

    def test_decimal_coefficient_is_cc(self):
        p = parse_polynomial("0.5*x", ["x"])
        assert p.domain == CC
        assert p.terms[(1,)] == pytest.approx(0.5)

    def test_basis_as_exponent_rows(self):
        assert parse_basis("0 0; 0 1", ["x1", "x2"]) == ((0, 0), (0, 1))

    def test_basis_as_monomials(self):
        assert parse_basis("1, x1, x2, x1*x2", ["x1", "x2"]) == ((0, 0), (1, 0), (0, 1), (1, 1))

    def test_basis_element_not_a_monomial(self):
        with pytest.raises(ParseError, match="not a monomial"):
            parse_basis("1; x1 + x2", ["x1", "x2"])

    def test_basis_row_length(self):
        with pytest.raises(ParseError, match="non-negative integers"):
            parse_basis("0 0 0; 1 0 0", ["x1", "x2"])


# ─── JSON ─────────────────────────────────────────────────────────────────────
class TestJson:
    def test_coefficients(self):
        assert encode_coefficient(Fraction(-3, 4)) == "-3/4"
        assert encode_coefficient(1 - 2j) == [1.0, -2.0]
        assert decode_coefficient("-3/4") == Fraction(-3, 4)
        assert decode_coefficient([1.0, -2.0]) == 1 - 2j

    def test_safe_encoder(self):
        """NaN → null; complex → [re, im]; Fraction → "p/q"; numpy scalars unwrap."""
        out = json.loads(_dumps({"a": float("nan"), "b": 1j, "c": Fraction(1, 3), "d": np.int64(4)}))
        assert out == {"a": None, "b": [0.0, 1.0], "c": "1/3", "d": 4}

    def test_poly_document(self):
        p = MPoly(2, {(1, 1): -4, (0, 1): 2})
        obj = poly_to_json(p, ["x1", "x2"])
        assert obj["text"] == "-4*x1*x2 + 2*x2"
        assert poly_from_json(obj, 2) == p

    def test_load_system_json(self, tmp_path):
        x = MPoly.variable(2, 0)
        doc = document("deflation-trace", variables=["a", "b"], final=[poly_to_json(x)])
        path = write_json(doc, tmp_path / "t.json")
        names, polys = load_system_json(path)
        assert names == ("a", "b")
        assert polys == (x,)

    def test_wrong_document_kind(self, tmp_path):
        path = write_json(document("bench", rows=[]), tmp_path / "b.json")
        with pytest.raises(ParseError, match="no polynomial system"):
            load_system_json(path)

    def test_unsupported_format(self, tmp_path):
        path = tmp_path / "x.json"
        path.write_text(json.dumps({"format": 99, "kind": "deflation-trace"}))
        with pytest.raises(ParseError, match="unsupported format"):
            load_system_json(path)
