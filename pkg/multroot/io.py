"""
System files in, JSON documents out.

A system file is line oriented:

    # comment
    vars: x1 x2
    f: x1 + x2^2
    f: x1^2 + x2^2
    root: 0, 0
    basis: 0 0; 0 1        (optional; also "basis: 1; x2")
    tol: 1e-8              (optional)
    rank_tol: 1e-8         (optional)

Polynomials are read with sympy (`^` for powers, `*` optional). All-rational input
stays exact (QQ); any decimal or irrational literal makes the whole system CC.
Root components are "p/q", decimals, or complex "a+bi".
"""
from __future__ import annotations
import json
import logging
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from tokenize import TokenError
from typing import Sequence

import sympy
from sympy.parsing.sympy_parser import (convert_xor, implicit_multiplication, parse_expr,
                                        standard_transformations)

from .errors import ParseError, ShapeError
from .poly import CC, QQ, Coefficient, Exponent, MPoly


log = logging.getLogger("multroot.io")

TRANSFORMS = standard_transformations + (implicit_multiplication, convert_xor)
_ALLOWED = re.compile(r"[A-Za-z0-9_ .+\-*/^()]")
_RATIONAL = re.compile(r"^[+-]?\d+(/\d+)?$")
_NAME = re.compile(r"^[A-Za-z][A-Za-z0-9_]*$")
KEYS = ("vars", "f", "root", "basis", "tol", "rank_tol")
FORMAT = 1


@dataclass(frozen=True)
class SystemFile:
    path: str
    names: tuple[str, ...]
    polynomials: tuple[MPoly, ...]
    root: tuple
    basis: tuple[Exponent, ...] | None = None
    tol: float | None = None
    rank_tol: float | None = None

    @property
    def nvars(self) -> int:
        return len(self.names)

    @property
    def domain(self) -> str:
        return self.polynomials[0].domain


# ── Polynomials ──────────────────────────────────────────────────────────────
def _coefficient(c) -> Coefficient:
    if c.is_Rational:
        return Fraction(int(c.p), int(c.q))
    try:
        return complex(c)
    except TypeError:
        raise ParseError(f"coefficient {c} is not a number") from None


def parse_polynomial(text: str, names: Sequence[str], line: int | None = None, offset: int = 0) -> MPoly:
    """One polynomial over `names`; QQ when every coefficient is rational, else CC."""
    for col, ch in enumerate(text, start=1):
        if not _ALLOWED.match(ch):
            raise ParseError(f"unexpected character {ch!r}", line, offset + col)
    if "__" in text:
        raise ParseError("'__' is not allowed in a polynomial", line, offset + text.index("__") + 1)
    if not text.strip():
        raise ParseError("empty polynomial", line, offset + 1)
    syms = [sympy.Symbol(n) for n in names]
    try:
        expr = parse_expr(text, local_dict=dict(zip(names, syms)), transformations=TRANSFORMS)
    except (SyntaxError, TokenError, TypeError, ValueError, AttributeError, NameError) as exc:
        raise ParseError(f"cannot parse {text.strip()!r}: {exc}", line, offset + 1) from None
    if not isinstance(expr, sympy.Expr):
        raise ParseError(f"{text.strip()!r} is not an expression", line, offset + 1)
    unknown = sorted(str(s) for s in expr.free_symbols - set(syms))
    if not unknown and expr.has(sympy.I):
        # sympy reads a bare I as the imaginary unit
        unknown = ["I"]
    if unknown:
        m = re.search(rf"\b{re.escape(unknown[0])}\b", text)
        raise ParseError(f"unknown variable {unknown[0]!r}", line, offset + (m.start() + 1 if m else 1))
    try:
        poly = sympy.Poly(expr, *syms)
    except sympy.PolynomialError as exc:
        raise ParseError(f"{text.strip()!r} is not a polynomial: {exc}", line, offset + 1) from None
    terms = {tuple(int(a) for a in e): _coefficient(c) for e, c in poly.terms() if c != 0}
    domain = QQ if all(isinstance(c, Fraction) for c in terms.values()) else CC
    return MPoly(len(names), terms, domain)


def _unify(polys: Sequence[MPoly]) -> tuple[MPoly, ...]:
    if any(p.domain == CC for p in polys):
        return tuple(p.to_domain(CC) for p in polys)
    return tuple(polys)


# ── Literals ─────────────────────────────────────────────────────────────────
def parse_number(text: str, line: int | None = None, column: int | None = None):
    """'3', '-1/2' → Fraction; '0.5', '1e-3' → float; '1+2i', '-1.5i', 'i' → complex."""
    s = text.strip().replace(" ", "")
    if _RATIONAL.match(s):
        if s.endswith("/0"):
            raise ParseError(f"zero denominator in {text!r}", line, column)
        return Fraction(s)
    try:
        if s.endswith(("i", "j")):
            body = s[:-1]
            if body in ("", "+", "-") or body[-1] in "+-":
                body += "1"
            return complex(body + "j")
        return float(s)
    except ValueError:
        raise ParseError(f"malformed number {text!r}", line, column) from None


def _split(body: str) -> list[str]:
    return [t.strip() for t in (body.split(",") if "," in body else body.split()) if t.strip()]


def parse_basis(text: str, names: Sequence[str], line: int | None = None) -> tuple[Exponent, ...]:
    """'0 0; 0 1' (exponent rows) or '1; x2' / '1, x1, x2, x1*x2' (monomials)."""
    items = [t.strip() for t in (text.split(";") if ";" in text else text.split(",")) if t.strip()]
    if not items:
        raise ParseError("empty basis", line)
    n = len(names)
    monomials = re.search(r"[A-Za-z]", text) is not None
    out = []
    for item in items:
        parts = item.split()
        if not monomials:
            if not all(re.fullmatch(r"\d+", p) for p in parts) or len(parts) != n:
                raise ParseError(f"exponent {item!r} is not {n} non-negative integers", line)
            out.append(tuple(int(p) for p in parts))
            continue
        p = parse_polynomial(item, names, line)
        if len(p.terms) != 1 or next(iter(p.terms.values())) != 1:
            raise ParseError(f"basis element {item!r} is not a monomial", line)
        out.append(next(iter(p.terms)))
    return tuple(out)


# ── System files ─────────────────────────────────────────────────────────────
def parse_system_text(text: str, path: str = "<string>") -> SystemFile:
    names: tuple[str, ...] | None = None
    raw_polys: list[tuple[int, int, str]] = []
    root_spec: tuple[int, int, str] | None = None
    basis_spec: tuple[int, str] | None = None
    tol = rank_tol = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        if ":" not in line:
            raise ParseError("expected 'key: value'", lineno, 1)
        key, body = line.split(":", 1)
        key = key.strip().lower()
        offset = line.index(":") + 1
        if key not in KEYS:
            raise ParseError(f"unknown key {key!r}; expected one of {KEYS}", lineno, 1)
        if key == "vars":
            names = tuple(_split(body))
            bad = [v for v in names if not _NAME.match(v)]
            if not names or bad:
                raise ParseError(f"bad variable list {body.strip()!r}", lineno, offset + 1)
            if len(set(names)) != len(names):
                raise ParseError(f"duplicate variable in {body.strip()!r}", lineno, offset + 1)
        elif key == "f":
            raw_polys.append((lineno, offset, body))
        elif key == "root":
            root_spec = (lineno, offset, body)
        elif key == "basis":
            basis_spec = (lineno, body)
        elif key in ("tol", "rank_tol"):
            try:
                value = float(body)
            except ValueError:
                raise ParseError(f"{key} must be a number, got {body.strip()!r}", lineno, offset + 1) from None
            if key == "tol":
                tol = value
            else:
                rank_tol = value

    if names is None:
        raise ParseError("missing 'vars:' line")
    if not raw_polys:
        raise ParseError("no polynomials ('f:' lines)")
    if root_spec is None:
        raise ParseError("missing 'root:' line")
    polys = _unify([parse_polynomial(body, names, lineno, offset) for lineno, offset, body in raw_polys])
    lineno, offset, body = root_spec
    root = tuple(parse_number(t, lineno, offset + 1) for t in _split(body))
    if len(root) != len(names):
        raise ParseError(f"root has {len(root)} components, {len(names)} variables declared", lineno, offset + 1)
    basis = parse_basis(basis_spec[1], names, basis_spec[0]) if basis_spec else None
    log.debug(f"{path}: {len(polys)} polynomials in {len(names)} variables ({polys[0].domain})")
    return SystemFile(path=str(path), names=names, polynomials=polys, root=root, basis=basis,
                      tol=tol, rank_tol=rank_tol)


def parse_system(path: str | Path) -> SystemFile:
    p = Path(path)
    if not p.exists():
        raise ParseError(f"{path} not found")
    return parse_system_text(p.read_text(), str(path))


# ── JSON ─────────────────────────────────────────────────────────────────────
class _SafeEncoder(json.JSONEncoder):
    """NaN / ±Inf become null; complex → [re, im]; Fraction → "p/q"."""
    def iterencode(self, o, _one_shot=False):
        return super().iterencode(self._sanitise(o), _one_shot)

    def _sanitise(self, obj):
        if isinstance(obj, Fraction):
            return encode_coefficient(obj)
        if isinstance(obj, complex):
            return [self._sanitise(obj.real), self._sanitise(obj.imag)]
        if isinstance(obj, float):
            return None if (math.isnan(obj) or math.isinf(obj)) else obj
        if isinstance(obj, dict):
            return {k: self._sanitise(v) for k, v in obj.items()}
        if isinstance(obj, (list, tuple)):
            return [self._sanitise(v) for v in obj]
        if hasattr(obj, "item"):
            return self._sanitise(obj.item())
        return obj


def _dumps(obj, **kwargs) -> str:
    kwargs.setdefault("cls", _SafeEncoder)
    return json.dumps(obj, **kwargs)


def encode_coefficient(c: Coefficient):
    if isinstance(c, Fraction):
        return str(c)
    c = complex(c)
    return [c.real, c.imag]


def decode_coefficient(v) -> Coefficient:
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, float):
        return complex(v)
    raise ParseError(f"bad coefficient {v!r}")


def poly_to_json(p: MPoly, names: Sequence[str] | None = None) -> dict:
    return {"terms": [[list(e), encode_coefficient(c)] for e, c in p.sorted_terms()], "text": p.to_str(names)}


def poly_from_json(obj: dict, nvars: int) -> MPoly:
    terms = {tuple(e): decode_coefficient(c) for e, c in obj["terms"]}
    domain = QQ if all(isinstance(c, Fraction) for c in terms.values()) else CC
    return MPoly(nvars, terms, domain)


def point_to_json(point: Sequence) -> list:
    return [encode_coefficient(v) if isinstance(v, Fraction) else [complex(v).real, complex(v).imag] for v in point]


def document(kind: str, **fields) -> dict:
    return {"format": FORMAT, "kind": kind, **fields}


def write_json(doc: dict, path: str | Path) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(_dumps(doc, indent=2, ensure_ascii=False))
    return p


def load_system_json(path: str | Path) -> tuple[tuple[str, ...], tuple[MPoly, ...]]:
    """(variable names, polynomials) from a "deflation-trace" or "deflated-system" document."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc.msg}", exc.lineno, exc.colno) from None
    if doc.get("format") != FORMAT:
        raise ParseError(f"{path}: unsupported format {doc.get('format')!r}")
    kind = doc.get("kind")
    if kind == "deflation-trace":
        rows = doc["final"]
    elif kind == "deflated-system":
        rows = [e["poly"] for e in doc["equations"]]
    else:
        raise ParseError(f"{path}: a {kind!r} document holds no polynomial system")
    names = tuple(doc["variables"])
    polys = tuple(poly_from_json(r, len(names)) for r in rows)
    if not polys:
        raise ShapeError(f"{path}: empty polynomial system")
    return names, _unify(polys)
