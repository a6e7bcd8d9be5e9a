"""
Sparse multivariate polynomials and dual-space functionals.

Polynomials live over one of two coefficient domains:
    QQ — exact rationals (fractions.Fraction), used for every constructed system
         whenever the input is rational;
    CC — complex doubles, used for decimal/irrational input and for anything
         evaluated or expanded at a floating point.

A dual functional Λ = Σ c_γ ∂^γ is anchored at ξ, with
    ∂^γ(p) := d^{|γ|} p / dx_1^{γ_1} ⋯ dx_n^{γ_n}  evaluated at ξ,
so Λ((x−ξ)^β) = c_β · β!.  That pairing value is what every matrix downstream
stores; factorials appear only in this module.

Exponent vectors are plain tuples of ints, variables are 0-based.
"""
from __future__ import annotations
import itertools
import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from types import MappingProxyType
from typing import Mapping, Sequence
import numpy as np

from .errors import DomainMismatchError, ShapeError


QQ = "QQ"
CC = "CC"
DOMAINS = (QQ, CC)

# CC coefficients smaller than this fraction of the operands' scale are rounding noise.
CC_RTOL = 1e-12

Exponent = tuple[int, ...]
Coefficient = Fraction | complex


# ── Exponent helpers ─────────────────────────────────────────────────────────
def grevlex_key(alpha: Exponent) -> tuple:
    """Sort key for graded reverse lexicographic order with x1 > x2 > … > xn."""
    return (sum(alpha), tuple(-e for e in reversed(alpha)))


def eorder_key(alpha: Exponent) -> tuple:
    """Degree-compatible order used for primal exponent sets E."""
    return (sum(alpha), tuple(reversed(alpha)))


def monomials_of_degree(n: int, d: int) -> list[Exponent]:
    out = []
    for combo in itertools.combinations_with_replacement(range(n), d):
        e = [0] * n
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    return sorted(out, key=grevlex_key)


def monomials_upto(n: int, t: int) -> list[Exponent]:
    """All exponents with |γ| ≤ t, by degree, ascending grevlex inside a degree."""
    out: list[Exponent] = []
    for d in range(t + 1):
        out.extend(monomials_of_degree(n, d))
    return out


def exp_factorial(alpha: Exponent) -> int:
    return math.prod(math.factorial(a) for a in alpha)


def unit(n: int, i: int) -> Exponent:
    return tuple(1 if j == i else 0 for j in range(n))


def add_exp(a: Exponent, b: Exponent) -> Exponent:
    return tuple(x + y for x, y in zip(a, b))


def sub_exp(a: Exponent, b: Exponent) -> Exponent | None:
    """a − b, or None when some entry would go negative."""
    d = tuple(x - y for x, y in zip(a, b))
    return None if any(v < 0 for v in d) else d


def _coerce(c, domain: str) -> Coefficient:
    if domain == QQ:
        if isinstance(c, Fraction):
            return c
        if isinstance(c, int):
            return Fraction(c)
        raise DomainMismatchError(f"cannot store {c!r} as an exact rational")
    return complex(c)


def _magnitude(terms: Mapping) -> float:
    return max((abs(c) for c in terms.values()), default=0.0)


def _prune(terms: dict, domain: str, scale: float = 0.0) -> dict:
    if domain == QQ:
        return {e: c for e, c in terms.items() if c != 0}
    cut = CC_RTOL * scale
    return {e: c for e, c in terms.items() if abs(c) > cut}


# ── MPoly ────────────────────────────────────────────────────────────────────
@dataclass(frozen=True, eq=False)
class MPoly:
    """Sparse polynomial in `nvars` variables: exponent tuple → coefficient."""
    nvars: int
    terms: Mapping[Exponent, Coefficient]
    domain: str = QQ

    def __post_init__(self):
        if self.domain not in DOMAINS:
            raise DomainMismatchError(f"unknown coefficient domain {self.domain!r}")
        clean: dict[Exponent, Coefficient] = {}
        for exp, c in self.terms.items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != self.nvars or any(e < 0 for e in exp):
                raise ShapeError(f"exponent {exp} does not fit {self.nvars} variables")
            c = _coerce(c, self.domain)
            clean[exp] = clean.get(exp, 0) + c
        object.__setattr__(self, "terms", MappingProxyType(_prune(clean, self.domain)))

    @classmethod
    def _raw(cls, nvars: int, terms: dict, domain: str) -> "MPoly":
        """Trusted constructor: terms already coerced and pruned."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "nvars", nvars)
        object.__setattr__(obj, "terms", MappingProxyType(terms))
        object.__setattr__(obj, "domain", domain)
        return obj

    # constructors
    @classmethod
    def zero(cls, nvars: int, domain: str = QQ) -> "MPoly":
        return cls._raw(nvars, {}, domain)

    @classmethod
    def constant(cls, nvars: int, c, domain: str = QQ) -> "MPoly":
        return cls(nvars, {(0,) * nvars: c}, domain)

    @classmethod
    def variable(cls, nvars: int, i: int, domain: str = QQ) -> "MPoly":
        if not 0 <= i < nvars:
            raise ShapeError(f"variable index {i} out of range for {nvars} variables")
        return cls(nvars, {unit(nvars, i): 1}, domain)

    # basic queries
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def leading(self) -> tuple[Exponent, Coefficient]:
        """Grevlex-leading (exponent, coefficient); the zero polynomial has none."""
        if not self.terms:
            raise ShapeError("the zero polynomial has no leading term")
        exp = max(self.terms, key=grevlex_key)
        return exp, self.terms[exp]

    def variables(self) -> set[int]:
        return {i for e in self.terms for i, a in enumerate(e) if a}

    def coefficient_scale(self) -> float:
        return float(_magnitude(self.terms))

    def to_domain(self, domain: str) -> "MPoly":
        if domain == self.domain:
            return self
        if domain == QQ:
            raise DomainMismatchError("cannot convert CC coefficients to exact rationals")
        return MPoly._raw(self.nvars, {e: complex(c) for e, c in self.terms.items()}, CC)

    # arithmetic
    def _check(self, other: "MPoly") -> None:
        if other.nvars != self.nvars:
            raise ShapeError(f"variable counts differ: {self.nvars} vs {other.nvars}")
        if other.domain != self.domain:
            raise DomainMismatchError(f"domains differ: {self.domain} vs {other.domain}")

    def _combine(self, other: "MPoly", sign: int) -> "MPoly":
        self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + sign * c
        scale = max(_magnitude(self.terms), _magnitude(other.terms))
        return MPoly._raw(self.nvars, _prune(out, self.domain, scale), self.domain)

    def __add__(self, other: "MPoly") -> "MPoly":
        return self._combine(other, 1)

    def __sub__(self, other: "MPoly") -> "MPoly":
        return self._combine(other, -1)

    def __neg__(self) -> "MPoly":
        return MPoly._raw(self.nvars, {e: -c for e, c in self.terms.items()}, self.domain)

    def scale(self, c) -> "MPoly":
        c = _coerce(c, self.domain)
        if c == 0:
            return MPoly.zero(self.nvars, self.domain)
        return MPoly._raw(self.nvars, {e: c * v for e, v in self.terms.items()}, self.domain)

    def __mul__(self, other) -> "MPoly":
        if not isinstance(other, MPoly):
            return self.scale(other)
        self._check(other)
        if not self.terms or not other.terms:
            return MPoly.zero(self.nvars, self.domain)
        out: dict[Exponent, Coefficient] = defaultdict(int)
        for ea, ca in self.terms.items():
            for eb, cb in other.terms.items():
                out[add_exp(ea, eb)] += ca * cb
        scale = _magnitude(self.terms) * _magnitude(other.terms)
        return MPoly._raw(self.nvars, _prune(dict(out), self.domain, scale), self.domain)

    def __rmul__(self, other) -> "MPoly":
        return self.scale(other)

    def __pow__(self, k: int) -> "MPoly":
        if k < 0:
            raise ShapeError("negative powers are not polynomials")
        out = MPoly.constant(self.nvars, 1, self.domain)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, MPoly):
            return NotImplemented
        return (self.nvars, self.domain) == (other.nvars, other.domain) and dict(self.terms) == dict(other.terms)

    def __hash__(self) -> int:
        return hash((self.nvars, self.domain, frozenset(self.terms.items())))

    # calculus
    def differentiate(self, i: int) -> "MPoly":
        """Formal partial derivative ∂p/∂x_i."""
        if not 0 <= i < self.nvars:
            raise ShapeError(f"variable index {i} out of range for {self.nvars} variables")
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                out[e[:i] + (e[i] - 1,) + e[i + 1:]] = c * e[i]
        return MPoly._raw(self.nvars, out, self.domain)

    def derivative(self, alpha: Exponent) -> "MPoly":
        """Multi-index derivative ∂^α p."""
        out = {}
        for e, c in self.terms.items():
            rest = sub_exp(e, alpha)
            if rest is None:
                continue
            out[rest] = c * math.prod(math.perm(a, k) for a, k in zip(e, alpha))
        return MPoly._raw(self.nvars, out, self.domain)

    # evaluation
    @cached_property
    def _compiled(self) -> tuple[np.ndarray, np.ndarray]:
        if not self.terms:
            return np.zeros((0, self.nvars), dtype=int), np.zeros(0, dtype=complex)
        exps = np.array(list(self.terms.keys()), dtype=int).reshape(len(self.terms), self.nvars)
        coefs = np.array([complex(c) for c in self.terms.values()], dtype=complex)
        return exps, coefs

    def evaluate(self, point: Sequence) -> complex:
        """p(point) in complex doubles; QQ coefficients are promoted."""
        pt = np.asarray([complex(v) for v in point], dtype=complex)
        if pt.shape != (self.nvars,):
            raise ShapeError(f"point has {pt.size} coordinates, polynomial has {self.nvars} variables")
        exps, coefs = self._compiled
        if not coefs.size:
            return 0j
        return complex(coefs @ np.prod(pt[None, :] ** exps, axis=1))

    def shift(self, point: Sequence) -> "MPoly":
        """Coefficients of p(ξ + y) in y, i.e. the Taylor expansion at ξ.

        Stays in QQ when p is QQ and every coordinate of ξ is rational.
        """
        if len(point) != self.nvars:
            raise ShapeError(f"point has {len(point)} coordinates, polynomial has {self.nvars} variables")
        exact = self.domain == QQ and all(isinstance(v, (int, Fraction)) for v in point)
        domain = QQ if exact else CC
        pt = [Fraction(v) if exact else complex(v) for v in point]
        cache: dict[tuple[int, int], list[tuple[int, Coefficient]]] = {}

        def expand(i: int, a: int):
            if (i, a) not in cache:
                if pt[i] == 0:
                    cache[i, a] = [(a, 1)]
                else:
                    cache[i, a] = [(b, math.comb(a, b) * pt[i] ** (a - b)) for b in range(a + 1)]
            return cache[i, a]

        out: dict[Exponent, Coefficient] = defaultdict(int)
        scale = 0.0
        for e, c in self.terms.items():
            for combo in itertools.product(*(expand(i, a) for i, a in enumerate(e))):
                v = c * math.prod(x[1] for x in combo)
                scale = max(scale, abs(v))
                out[tuple(x[0] for x in combo)] += v
        terms = {k: (v if exact else complex(v)) for k, v in out.items()}
        return MPoly._raw(self.nvars, _prune(terms, domain, scale), domain)

    # restructuring
    def embed(self, offset: int, nvars: int) -> "MPoly":
        """Same polynomial with its variables placed at offset..offset+n−1 of `nvars`."""
        if offset < 0 or offset + self.nvars > nvars:
            raise ShapeError(f"cannot embed {self.nvars} variables at offset {offset} into {nvars}")
        pad = (0,) * (nvars - offset - self.nvars)
        out = {(0,) * offset + e + pad: c for e, c in self.terms.items()}
        return MPoly._raw(nvars, out, self.domain)

    def reindex(self, mapping: Mapping[int, int], nvars: int) -> "MPoly":
        """Move variable i to mapping[i]; unmapped variables must not occur."""
        out = {}
        for e, c in self.terms.items():
            new = [0] * nvars
            for i, a in enumerate(e):
                if a:
                    if i not in mapping:
                        raise ShapeError(f"variable {i} occurs but has no target index")
                    new[mapping[i]] += a
            out[tuple(new)] = c
        return MPoly._raw(nvars, out, self.domain)

    def substitute(self, i: int, q: "MPoly") -> "MPoly":
        """Replace x_i by q (same variable count and domain)."""
        self._check(q)
        powers: dict[int, MPoly] = {}
        acc = MPoly.zero(self.nvars, self.domain)
        rest_terms: dict[Exponent, Coefficient] = {}
        grouped: dict[int, dict[Exponent, Coefficient]] = defaultdict(dict)
        for e, c in self.terms.items():
            if e[i]:
                grouped[e[i]][e[:i] + (0,) + e[i + 1:]] = c
            else:
                rest_terms[e] = c
        for d, part in sorted(grouped.items()):
            if d not in powers:
                powers[d] = q ** d
            acc = acc + MPoly._raw(self.nvars, part, self.domain) * powers[d]
        return acc + MPoly._raw(self.nvars, rest_terms, self.domain)

    def normalized(self) -> "MPoly":
        """Divide by the grevlex-leading coefficient (zero stays zero)."""
        if not self.terms:
            return self
        _, lc = self.leading()
        inv = 1 / lc
        return MPoly._raw(self.nvars, {e: c * inv for e, c in self.terms.items()}, self.domain)

    def monomial_cofactor(self, other: "MPoly", rtol: float = 1e-10) -> Exponent | None:
        """m with self = c·x^m·other for a nonzero scalar c, else None."""
        if self.is_zero() or other.is_zero() or len(self.terms) != len(other.terms):
            return None
        m = sub_exp(self.leading()[0], other.leading()[0])
        if m is None:
            return None
        a, b = self.normalized(), other.normalized()
        exact = a.domain == QQ and b.domain == QQ
        for e, c in b.terms.items():
            d = a.terms.get(add_exp(e, m))
            if d is None:
                return None
            if exact and d != c:
                return None
            if not exact and abs(d - c) > rtol * max(1.0, b.coefficient_scale()):
                return None
        return m

    # display
    def sorted_terms(self) -> list[tuple[Exponent, Coefficient]]:
        return sorted(self.terms.items(), key=lambda t: grevlex_key(t[0]), reverse=True)

    def to_str(self, names: Sequence[str] | None = None) -> str:
        names = list(names) if names is not None else [f"x{i + 1}" for i in range(self.nvars)]
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            mono = "*".join(n if a == 1 else f"{n}^{a}" for n, a in zip(names, e) if a)
            coef = format_coefficient(c)
            if mono and coef in ("1", "-1"):
                body = ("-" if coef == "-1" else "") + mono
            elif mono:
                body = f"{coef}*{mono}"
            else:
                body = coef
            parts.append(body)
        text = parts[0]
        for p in parts[1:]:
            text += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return text

    def __repr__(self) -> str:
        return f"MPoly[{self.domain}]({self.to_str()})"


def format_coefficient(c: Coefficient) -> str:
    if isinstance(c, Fraction):
        return str(c)
    if c.imag == 0:
        return f"{c.real:.17g}"
    return f"({c.real:.17g}{c.imag:+.17g}j)"


def common_shape(polys: Sequence[MPoly]) -> tuple[int, str]:
    """(nvars, domain) shared by a nonempty system."""
    if not polys:
        raise ShapeError("empty polynomial system")
    n, dom = polys[0].nvars, polys[0].domain
    for p in polys[1:]:
        if p.nvars != n:
            raise ShapeError(f"variable counts differ: {n} vs {p.nvars}")
        if p.domain != dom:
            raise DomainMismatchError(f"domains differ: {dom} vs {p.domain}")
    return n, dom


def jacobian(F: Sequence[MPoly]) -> list[list[MPoly]]:
    """N×n matrix of formal partials [∂_j f_i]."""
    n, _ = common_shape(F)
    return [[f.differentiate(j) for j in range(n)] for f in F]


def evaluate_matrix(M: Sequence[Sequence[MPoly]], point: Sequence) -> np.ndarray:
    return np.array([[p.evaluate(point) for p in row] for row in M], dtype=complex)


def evaluate_system(F: Sequence[MPoly], point: Sequence) -> np.ndarray:
    return np.array([f.evaluate(point) for f in F], dtype=complex)


class DistinctPolys:
    """Accumulates nonzero polynomials, rejecting duplicates up to a scalar factor.

    QQ uses exact equality after normalizing by the leading coefficient;
    CC compares normalized coefficients within `rtol`. With `up_to_scale=False`
    only identical polynomials count as duplicates.
    """

    def __init__(self, rtol: float = 1e-10, up_to_scale: bool = True):
        self.rtol = rtol
        self.up_to_scale = up_to_scale
        self._exact: set[MPoly] = set()
        self._approx: list[MPoly] = []

    def add(self, p: MPoly) -> bool:
        """True if p is new (and now recorded); False for zero or duplicates."""
        if p.is_zero():
            return False
        q = p.normalized() if self.up_to_scale else p
        if q.domain == QQ:
            if q in self._exact:
                return False
            self._exact.add(q)
            return True
        for r in self._approx:
            if r.terms.keys() == q.terms.keys():
                diff = max(abs(q.terms[e] - r.terms[e]) for e in q.terms)
                if diff <= self.rtol * max(1.0, q.coefficient_scale()):
                    return False
        self._approx.append(q)
        return True


# ── Dual functionals ─────────────────────────────────────────────────────────
@dataclass(frozen=True, eq=False)
class DualElement:
    """Λ = Σ c_γ ∂^γ anchored at ξ (raw-∂ basis, complex coefficients)."""
    anchor: tuple[complex, ...]
    terms: Mapping[Exponent, complex]

    def __post_init__(self):
        anchor = tuple(complex(v) for v in self.anchor)
        n = len(anchor)
        clean = {}
        for e, c in self.terms.items():
            e = tuple(int(a) for a in e)
            if len(e) != n:
                raise ShapeError(f"exponent {e} does not fit anchor of length {n}")
            if c != 0:
                clean[e] = complex(c)
        object.__setattr__(self, "anchor", anchor)
        object.__setattr__(self, "terms", MappingProxyType(clean))

    @classmethod
    def evaluation(cls, anchor: Sequence) -> "DualElement":
        """1_ξ."""
        return cls(tuple(anchor), {(0,) * len(anchor): 1})

    @classmethod
    def from_pairings(cls, anchor: Sequence, values: Mapping[Exponent, complex]) -> "DualElement":
        """Build Λ from its values Λ((x−ξ)^γ)."""
        return cls(tuple(anchor), {g: v / exp_factorial(g) for g, v in values.items()})

    @property
    def nvars(self) -> int:
        return len(self.anchor)

    @property
    def order(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def pairing(self, beta: Exponent) -> complex:
        """Λ((x−ξ)^β) = c_β · β!."""
        return self.terms.get(tuple(beta), 0j) * exp_factorial(beta)

    def apply(self, p: MPoly) -> complex:
        return apply_dual(self, p)

    def derivative(self, i: int) -> "DualElement":
        """d/d∂_i Λ, which equals the functional p ↦ Λ((x_i−ξ_i)·p)."""
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                out[e[:i] + (e[i] - 1,) + e[i + 1:]] = c * e[i]
        return DualElement(self.anchor, out)

    def to_str(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, c in sorted(self.terms.items(), key=lambda t: grevlex_key(t[0]), reverse=True):
            mono = "*".join(f"d{i + 1}" if a == 1 else f"d{i + 1}^{a}" for i, a in enumerate(e) if a) or "1"
            parts.append(f"{format_coefficient(c)}*{mono}")
        return " + ".join(parts)


def apply_dual(L: DualElement, p: MPoly) -> complex:
    """Λ(p) = Σ_γ c_γ ∂^γ(p)(ξ), read off the Taylor expansion of p at ξ."""
    if L.nvars != p.nvars:
        raise ShapeError(f"functional anchored in {L.nvars} variables, polynomial has {p.nvars}")
    g = p.shift(L.anchor)
    return complex(sum(c * exp_factorial(e) * complex(g.terms.get(e, 0)) for e, c in L.terms.items()))

