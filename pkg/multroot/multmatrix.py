"""
Parametric multiplication matrices and the deflated system for (ξ, multiplicity structure).

Given a primal basis {(x−ξ)^α : α ∈ E} with E connected to 1, multiplication by
(x_i − ξ_i) on the local quotient ring has the matrix

    M_i[k][l] = Λ_k((x−ξ)^{α_l + e_i}) = ν_{α_k, α_l+e_i}.

Each entry is 1 when α_k = α_l + e_i, 0 when α_l + e_i is some other element of E,
and otherwise an unknown μ_{α_k, α_l+e_i}. Unknowns are shared wherever the pair
(α, β) repeats. Matrices act on column vectors and are strictly lower triangular in
E-order. M(μ)^γ[1] = M_1^{γ_1} ⋯ M_n^{γ_n} e_0.

The parametric normal form N_{z,μ}(p) = Σ_γ (1/γ!) ∂^γ p(z) · M(μ)^γ[1]. Its entries
for every f_k, together with the entries of the commutators M_i M_j − M_j M_i, form a
system in (z, μ). The point (ξ, ν) is a simple root of that system.

Every polynomial here is exact (QQ) when the input system is.
"""
from __future__ import annotations
import itertools
import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Mapping, Sequence
import numpy as np

from .dual import PrimalDualPair, is_connected_to_one
from .errors import BasisError, NumericalError, ShapeError
from .poly import (CC, QQ, DistinctPolys, DualElement, Exponent, MPoly, add_exp, common_shape, eorder_key,
                   grevlex_key, monomials_upto, unit)


log = logging.getLogger("multroot.multmatrix")

Pair = tuple[Exponent, Exponent]
Matrix = Mapping[tuple[int, int], MPoly]


# ── Exponent sets ────────────────────────────────────────────────────────────
@dataclass(frozen=True)
class ExponentSets:
    """E in E-order, E⁺ = ∪_i (E + e_i) and the border ∂(E) = E⁺ \\ E (grevlex)."""
    exponents: tuple[Exponent, ...]
    plus: tuple[Exponent, ...]
    border: tuple[Exponent, ...]

    @property
    def nvars(self) -> int:
        return len(self.exponents[0])

    @property
    def delta(self) -> int:
        return len(self.exponents)

    def index(self, alpha: Exponent) -> int:
        return self.exponents.index(tuple(alpha))


def exponent_sets(E: Sequence[Sequence[int]]) -> ExponentSets:
    exps = [tuple(int(a) for a in alpha) for alpha in E]
    if not exps:
        raise BasisError("empty exponent set")
    n = len(exps[0])
    if any(len(alpha) != n for alpha in exps):
        raise BasisError(f"exponents of different lengths in {exps}")
    if len(set(exps)) != len(exps):
        raise BasisError(f"duplicate exponents in {exps}")
    if not is_connected_to_one(exps):
        raise BasisError(f"exponent set {exps} is not connected to 1")
    exps.sort(key=eorder_key)
    plus = {add_exp(alpha, unit(n, i)) for alpha in exps for i in range(n)}
    border = plus - set(exps)
    return ExponentSets(exponents=tuple(exps),
                        plus=tuple(sorted(plus, key=grevlex_key)),
                        border=tuple(sorted(border, key=grevlex_key)))


# ── Parametric matrices ──────────────────────────────────────────────────────
@dataclass(frozen=True)
class ParamMulMatrices:
    """n sparse δ×δ matrices whose entries are polynomials in the registered μ."""
    sets: ExponentSets
    registry: tuple[Pair, ...]
    matrices: tuple[Matrix, ...]

    @property
    def nparams(self) -> int:
        return len(self.registry)

    def entry(self, i: int, k: int, l: int) -> MPoly:
        return self.matrices[i].get((k, l), MPoly.zero(self.nparams))

    def kind(self, i: int, k: int, l: int) -> str:
        """zero | one | variable | polynomial."""
        p = self.entry(i, k, l)
        if p.is_zero():
            return "zero"
        if p == MPoly.constant(self.nparams, 1):
            return "one"
        if len(p.terms) == 1 and next(iter(p.terms.values())) == 1 and sum(next(iter(p.terms))) == 1:
            return "variable"
        return "polynomial"

    def evaluate(self, values: Sequence) -> list[np.ndarray]:
        vals = [complex(v) for v in values]
        if len(vals) != self.nparams:
            raise ShapeError(f"{len(vals)} values for {self.nparams} parameters")
        delta = self.sets.delta
        out = []
        for M in self.matrices:
            A = np.zeros((delta, delta), dtype=complex)
            for (k, l), p in M.items():
                A[k, l] = p.evaluate(vals)
            out.append(A)
        return out


def build_param_matrices(S: ExponentSets) -> ParamMulMatrices:
    """Entry rule over (matrix i, column l, row k); μ registered on first occurrence."""
    n, delta = S.nvars, S.delta
    E = S.exponents
    in_E = set(E)
    registry: list[Pair] = []
    where: dict[Pair, int] = {}
    raw: list[dict[tuple[int, int], int | None]] = [dict() for _ in range(n)]
    for i in range(n):
        for l in range(delta):
            beta = add_exp(E[l], unit(n, i))
            for k in range(l + 1, delta):
                if E[k] == beta:
                    raw[i][k, l] = None
                elif beta not in in_E:
                    pair = (E[k], beta)
                    if pair not in where:
                        where[pair] = len(registry)
                        registry.append(pair)
                    raw[i][k, l] = where[pair]
    m = len(registry)
    one = MPoly.constant(m, 1)
    matrices = tuple(
        {pos: one if v is None else MPoly.variable(m, v) for pos, v in M.items()} for M in raw
    )
    log.debug(f"{m} parameters for δ={delta}, n={n}")
    return ParamMulMatrices(sets=S, registry=tuple(registry), matrices=matrices)


def _matmul(A: Matrix, B: Matrix, m: int) -> dict[tuple[int, int], MPoly]:
    by_row: dict[int, list[tuple[int, MPoly]]] = defaultdict(list)
    for (p, l), b in B.items():
        by_row[p].append((l, b))
    out: dict[tuple[int, int], MPoly] = {}
    for (k, p), a in A.items():
        for l, b in by_row.get(p, ()):
            out[k, l] = out.get((k, l), MPoly.zero(m)) + a * b
    return {pos: v for pos, v in out.items() if not v.is_zero()}


def _commutator(P: ParamMulMatrices, i: int, j: int) -> list[tuple[tuple[int, int], MPoly]]:
    m = P.nparams
    ij = _matmul(P.matrices[i], P.matrices[j], m)
    ji = _matmul(P.matrices[j], P.matrices[i], m)
    diff = []
    for pos in sorted(set(ij) | set(ji)):
        d = ij.get(pos, MPoly.zero(m)) - ji.get(pos, MPoly.zero(m))
        if not d.is_zero():
            diff.append((pos, d))
    return diff


def _affine_pivot(p: MPoly) -> tuple[int, MPoly] | None:
    """(a, value) if p = c·μ_a + r with c constant and μ_a absent from r; highest a wins."""
    m = p.nvars
    for a in sorted(p.variables(), reverse=True):
        touching = [(e, c) for e, c in p.terms.items() if e[a]]
        if len(touching) == 1 and touching[0][0] == unit(m, a):
            c = touching[0][1]
            rest = p - MPoly.variable(m, a, p.domain).scale(c)
            return a, rest.scale(-1 / c)
    return None


def reduce_parameters(S: ExponentSets, P: ParamMulMatrices) -> ParamMulMatrices:
    """Eliminate μ variables that some commutator entry determines affinely, to a fixpoint."""
    m = P.nparams
    entries = [d for i, j in itertools.combinations(range(S.nvars), 2) for _, d in _commutator(P, i, j)]
    mats = [dict(M) for M in P.matrices]
    eliminated: list[int] = []
    while True:
        pick = None
        for e in entries:
            pick = _affine_pivot(e)
            if pick is not None:
                break
        if pick is None:
            break
        a, value = pick
        log.debug(f"eliminate μ{a + 1} = {value.to_str([f'mu{v + 1}' for v in range(m)])}")

        def sub(p: MPoly) -> MPoly:
            return p.substitute(a, value) if any(e[a] for e in p.terms) else p

        entries = [q for q in map(sub, entries) if not q.is_zero()]
        mats = [{pos: q for pos, q in ((pos, sub(v)) for pos, v in M.items()) if not q.is_zero()} for M in mats]
        eliminated.append(a)

    keep = [a for a in range(m) if a not in set(eliminated)]
    mapping = {a: new for new, a in enumerate(keep)}
    matrices = tuple({pos: v.reindex(mapping, len(keep)) for pos, v in M.items()} for M in mats)
    log.info(f"parameter reduction: {m} → {len(keep)}")
    return ParamMulMatrices(sets=S, registry=tuple(P.registry[a] for a in keep), matrices=matrices)


# ── Normal form ──────────────────────────────────────────────────────────────
class PowerColumns:
    """Memoized M(μ)^γ[1], computed as M_i · M(μ)^{γ−e_i}[1] with i the first nonzero index of γ."""

    def __init__(self, P: ParamMulMatrices):
        self.P = P
        m, delta = P.nparams, P.sets.delta
        self._rows = [defaultdict(list) for _ in P.matrices]
        for i, M in enumerate(P.matrices):
            for (k, l), v in M.items():
                self._rows[i][k].append((l, v))
        e0 = tuple(MPoly.constant(m, 1) if k == 0 else MPoly.zero(m) for k in range(delta))
        self._cache: dict[Exponent, tuple[MPoly, ...]] = {(0,) * P.sets.nvars: e0}

    def __getitem__(self, gamma: Exponent) -> tuple[MPoly, ...]:
        gamma = tuple(gamma)
        if gamma in self._cache:
            return self._cache[gamma]
        m, delta = self.P.nparams, self.P.sets.delta
        if sum(gamma) >= delta:
            v = tuple(MPoly.zero(m) for _ in range(delta))
        else:
            i = next(j for j, g in enumerate(gamma) if g)
            prev = self[gamma[:i] + (gamma[i] - 1,) + gamma[i + 1:]]
            v = []
            for k in range(delta):
                acc = MPoly.zero(m)
                for l, a in self._rows[i].get(k, ()):
                    if not prev[l].is_zero():
                        acc = acc + a * prev[l]
                v.append(acc)
            v = tuple(v)
        self._cache[gamma] = v
        return v


def param_normal_form(p: MPoly, P: ParamMulMatrices, columns: PowerColumns | None = None) -> tuple[MPoly, ...]:
    """N_{z,μ}(p) as δ polynomials in (z_1..z_n, μ_1..μ_m)."""
    n, m, delta = P.sets.nvars, P.nparams, P.sets.delta
    if p.nvars != n:
        raise ShapeError(f"polynomial has {p.nvars} variables, matrices are for {n}")
    columns = columns or PowerColumns(P)
    total = n + m

    # (1/γ!) ∂^γ p (z), grouped by γ
    groups: dict[Exponent, dict[Exponent, object]] = defaultdict(lambda: defaultdict(int))
    for a, c in p.terms.items():
        for gamma in itertools.product(*(range(x + 1) for x in a)):
            if sum(gamma) >= delta:
                continue
            rest = tuple(x - g for x, g in zip(a, gamma))
            groups[gamma][rest] += c * math.prod(math.comb(x, g) for x, g in zip(a, gamma))

    out = [MPoly.zero(total, p.domain) for _ in range(delta)]
    for gamma in sorted(groups, key=grevlex_key):
        v = columns[gamma]
        if all(x.is_zero() for x in v):
            continue
        q = MPoly(n, dict(groups[gamma]), p.domain).embed(0, total)
        if q.is_zero():
            continue
        for k in range(delta):
            if not v[k].is_zero():
                out[k] = out[k] + q * v[k].embed(n, total).to_domain(p.domain)
    return tuple(out)


# ── Commutators and the deflated system ──────────────────────────────────────
@dataclass(frozen=True)
class TaggedPoly:
    """A polynomial with its provenance.

    source "normal-form": index (k, row) — entry `row` of N_{z,μ}(f_k);
    source "commutator":  index (i, j, row, col) — entry of M_i M_j − M_j M_i.
    """
    poly: MPoly
    source: str
    index: tuple[int, ...]


def commutator_equations(P: ParamMulMatrices, fold_signs: bool = True) -> tuple[TaggedPoly, ...]:
    """Nonzero entries of M_i M_j − M_j M_i in the μ variables.

    fold_signs: pairs i < j; duplicates up to a scalar and monomial multiples of a
    kept entry (μ1μ3μ9 next to μ1μ3) dropped. Otherwise every ordered pair i ≠ j
    with only identical entries dropped.
    """
    n = P.sets.nvars
    pairs = itertools.combinations(range(n), 2) if fold_signs else itertools.permutations(range(n), 2)
    seen = DistinctPolys(up_to_scale=fold_signs)
    out = []
    for i, j in pairs:
        for (row, col), d in _commutator(P, i, j):
            if seen.add(d):
                out.append(TaggedPoly(d, "commutator", (i, j, row, col)))
    if not fold_signs:
        return tuple(out)

    # lowest degree first, so a multiple always meets its divisor already kept
    kept: list[TaggedPoly] = []
    for t in sorted(out, key=lambda t: (t.poly.degree, len(t.poly.terms))):
        if any(t.poly.monomial_cofactor(k.poly) is not None for k in kept):
            log.debug(f"commutator {t.index} is a monomial multiple of a kept entry")
            continue
        kept.append(t)
    keep = {id(t) for t in kept}
    return tuple(t for t in out if id(t) in keep)


@dataclass(frozen=True)
class DeflatedSystem:
    """Polynomials in z (n) then μ (registry order), nonzero and pairwise distinct."""
    equations: tuple[TaggedPoly, ...]
    variables: tuple[str, ...]
    nz: int
    matrices: ParamMulMatrices

    @property
    def polynomials(self) -> tuple[MPoly, ...]:
        return tuple(e.poly for e in self.equations)

    @property
    def count(self) -> int:
        return len(self.equations)

    @property
    def nvars(self) -> int:
        return len(self.variables)

    @property
    def nparams(self) -> int:
        return self.matrices.nparams


def build_deflated_system(F: Sequence[MPoly], S: ExponentSets, reduce: bool = False,
                          names: Sequence[str] | None = None, fold_signs: bool = True,
                          dedup_rtol: float = 1e-10) -> DeflatedSystem:
    n, dom = common_shape(F)
    if S.nvars != n:
        raise ShapeError(f"exponent set is for {S.nvars} variables, system has {n}")
    P = build_param_matrices(S)
    if reduce:
        P = reduce_parameters(S, P)
    m = P.nparams
    columns = PowerColumns(P)
    seen = DistinctPolys(dedup_rtol, up_to_scale=fold_signs)
    equations: list[TaggedPoly] = []
    for k, f in enumerate(F):
        for row, q in enumerate(param_normal_form(f, P, columns)):
            if seen.add(q):
                equations.append(TaggedPoly(q, "normal-form", (k, row)))
    for tagged in commutator_equations(P, fold_signs):
        q = tagged.poly.embed(n, n + m).to_domain(dom)
        if seen.add(q):
            equations.append(TaggedPoly(q, "commutator", tagged.index))

    znames = list(names) if names is not None else [f"z{i + 1}" for i in range(n)]
    if len(znames) != n:
        raise ShapeError(f"{len(znames)} names for {n} variables")
    variables = tuple(znames) + tuple(f"mu{j + 1}" for j in range(m))
    bound = len(F) * S.delta + n * (n - 1) * (S.delta - 1) * (S.delta - 2) // 4
    if fold_signs and len(equations) > bound:
        raise NumericalError(f"{len(equations)} equations exceed the bound {bound}")
    log.info(f"deflated system: {len(equations)} polynomials in {len(variables)} variables")
    return DeflatedSystem(equations=tuple(equations), variables=variables, nz=n, matrices=P)


# ── Back from matrices to the dual basis ─────────────────────────────────────
def mu_values(pair: PrimalDualPair, P: ParamMulMatrices) -> np.ndarray:
    """ν at every registered (α, β); the pair must use the same E."""
    if tuple(pair.exponents) != tuple(P.sets.exponents):
        raise BasisError(f"dual basis uses E={pair.exponents}, matrices use E={P.sets.exponents}")
    return np.array([pair.nu(alpha, beta) for alpha, beta in P.registry], dtype=complex)


def dual_from_matrices(matrices: Sequence[np.ndarray], S: ExponentSets, o: int, anchor: Sequence,
                       tol: float = 1e-8) -> PrimalDualPair:
    """ν_{α_i,γ} = [M^γ e_0]_i for |γ| ≤ o, and the dual basis they define."""
    n, delta = S.nvars, S.delta
    mats = [np.asarray(M, dtype=complex) for M in matrices]
    if len(mats) != n or any(M.shape != (delta, delta) for M in mats):
        raise ShapeError(f"expected {n} matrices of shape {delta}×{delta}")
    scale = max(1.0, max(float(np.abs(M).max(initial=0.0)) for M in mats))
    for i, j in itertools.combinations(range(n), 2):
        gap = float(np.abs(mats[i] @ mats[j] - mats[j] @ mats[i]).max(initial=0.0))
        if gap > tol * scale * scale:
            raise NumericalError(f"M_{i + 1} and M_{j + 1} do not commute (gap {gap:.3e})")

    vecs: dict[Exponent, np.ndarray] = {(0,) * n: np.eye(delta, dtype=complex)[:, 0]}
    grid = monomials_upto(n, o)
    for gamma in grid[1:]:
        i = next(j for j, g in enumerate(gamma) if g)
        vecs[gamma] = mats[i] @ vecs[gamma[:i] + (gamma[i] - 1,) + gamma[i + 1:]]

    E = S.exponents
    in_E = set(E)
    basis = tuple(
        DualElement.from_pairings(anchor, {g: vecs[g][i] for g in grid if vecs[g][i] != 0}) for i in range(delta)
    )
    table = {(E[i], g): complex(vecs[g][i]) for i in range(delta) for g in grid if g not in in_E}
    return PrimalDualPair(anchor=tuple(complex(v) for v in anchor), exponents=E, basis=basis,
                          table=table, nil_index=o)
