"""
Deflation with first-order differentials.

At an approximate root ξ̃ where r = rank J_f(ξ̃) < n, an r×r block A(x) of the Jacobian
(rows R, columns C) is chosen. B(x) holds the other columns of the same rows. The c = n − r columns of

    [ adj(A(x)) · (−B(x)) ; det(A(x)) · Id ]

are polynomial vectors λ(x) with J_f(ξ)·λ(ξ) = 0. Each is read as a differential form
Λ^x = Σ_j λ_j(x) ∂_j. Appending Λ^x(f_1), …, Λ^x(f_N) to f strictly lowers the
multiplicity and the nil-index of the root. Repeating this ends at a simple root
after at most o steps.

Every coefficient stays in the input's domain; nothing here divides.
"""
from __future__ import annotations
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence
import numpy as np

from .errors import NumericalError, ShapeError, SimpleRootError
from .linalg import max_rank_submatrix, numerical_rank
from .poly import DistinctPolys, MPoly, common_shape, evaluate_matrix, evaluate_system, jacobian
from .refine import newton_refine, random_square_subsystem


log = logging.getLogger("multroot.deflation")

STRATEGIES = ("auto", "first", "generic")


@dataclass(frozen=True)
class KernelForm:
    """Λ^x = Σ_j λ_j(x) ∂_j; `column` is the non-block Jacobian column it came from."""
    coefficients: tuple[MPoly, ...]
    column: int | None

    def apply(self, f: MPoly) -> MPoly:
        out = MPoly.zero(f.nvars, f.domain)
        for j, lam in enumerate(self.coefficients):
            if not lam.is_zero():
                out = out + lam * f.differentiate(j)
        return out

    def at(self, point: Sequence) -> np.ndarray:
        return np.array([lam.evaluate(point) for lam in self.coefficients], dtype=complex)


@dataclass(frozen=True)
class DeflationTrace:
    """f = f^(0), f^(1), … with the block, rank and point used at each step.

    `ranks` has one entry per system (the last is n); `blocks` and
    `appended` have one entry per deflation step.
    """
    systems: tuple[tuple[MPoly, ...], ...]
    blocks: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]
    ranks: tuple[int, ...]
    appended: tuple[int, ...]
    points: tuple[tuple[complex, ...], ...]

    @property
    def iterations(self) -> int:
        return len(self.systems) - 1

    @property
    def final(self) -> tuple[MPoly, ...]:
        return self.systems[-1]


# ── Exact determinants ───────────────────────────────────────────────────────
def determinant(A: Sequence[Sequence[MPoly]], nvars: int, domain: str) -> MPoly:
    """Cofactor expansion along the first row (the 0×0 determinant is 1)."""
    k = len(A)
    if k == 0:
        return MPoly.constant(nvars, 1, domain)
    if k == 1:
        return A[0][0]
    if k == 2:
        return A[0][0] * A[1][1] - A[0][1] * A[1][0]
    acc = MPoly.zero(nvars, domain)
    for j in range(k):
        if A[0][j].is_zero():
            continue
        minor = [row[:j] + row[j + 1:] for row in A[1:]]
        term = A[0][j] * determinant(minor, nvars, domain)
        acc = acc + term if j % 2 == 0 else acc - term
    return acc


def adjugate(A: Sequence[Sequence[MPoly]], nvars: int, domain: str) -> list[list[MPoly]]:
    """adj(A)[i][j] = (−1)^{i+j} det(A with row j and column i removed)."""
    k = len(A)
    adj = []
    for i in range(k):
        row = []
        for j in range(k):
            minor = [[A[r][c] for c in range(k) if c != i] for r in range(k) if r != j]
            d = determinant(minor, nvars, domain)
            row.append(-d if (i + j) % 2 else d)
        adj.append(row)
    return adj


# ── Kernel forms ─────────────────────────────────────────────────────────────
def _rank_at(J: Sequence[Sequence[MPoly]], point: Sequence, rtol: float):
    Jx = evaluate_matrix(J, point)
    return Jx, numerical_rank(Jx, rtol=rtol, atol=rtol)


def _block_still_holds(Jx: np.ndarray, block, report) -> bool:
    rows, cols = block
    rank = report.rank
    if len(rows) != rank:
        return False
    if rank == 0:
        return True
    return numerical_rank(Jx[np.ix_(rows, cols)], report.tol).rank == rank


def _kernel_block(F: Sequence[MPoly], J, Jx: np.ndarray, report,
                  block: tuple[tuple[int, ...], tuple[int, ...]] | None = None
                  ) -> tuple[tuple[KernelForm, ...], tuple, tuple]:
    n, dom = common_shape(F)
    r = report.rank
    if r == n:
        raise SimpleRootError(f"Jacobian has full column rank {n}: the root is already simple")
    rows, cols = block if block is not None else max_rank_submatrix(Jx, r, report.tol)
    others = [j for j in range(n) if j not in cols]
    A = [[J[i][j] for j in cols] for i in rows]
    B = [[J[i][j] for j in others] for i in rows]
    adj = adjugate(A, n, dom)
    det = determinant(A, n, dom)

    forms = []
    for s, q in enumerate(others):
        lam = [MPoly.zero(n, dom) for _ in range(n)]
        for p, cp in enumerate(cols):
            acc = MPoly.zero(n, dom)
            for m in range(r):
                acc = acc - adj[p][m] * B[m][s]
            lam[cp] = acc
        lam[q] = det
        forms.append(KernelForm(tuple(lam), q))
    log.debug(f"rank {r}: block rows {rows}, cols {cols}; {len(forms)} kernel form(s)")
    return tuple(forms), rows, cols


def kernel_forms(F: Sequence[MPoly], xi: Sequence, rtol: float = 1e-8) -> tuple[KernelForm, ...]:
    """Exact polynomial kernel forms for the Jacobian block chosen at ξ̃."""
    J = jacobian(F)
    Jx, report = _rank_at(J, xi, rtol)
    return _kernel_block(F, J, Jx, report)[0]


def _select(forms: Sequence[KernelForm], i_set: Sequence[int] | None = None,
            weights: Sequence | None = None) -> list[KernelForm]:
    if weights is not None:
        if len(weights) != len(forms):
            raise ShapeError(f"{len(weights)} weights for {len(forms)} kernel forms")
        n = len(forms[0].coefficients)
        coeffs = []
        for j in range(n):
            acc = MPoly.zero(forms[0].coefficients[j].nvars, forms[0].coefficients[j].domain)
            for w, form in zip(weights, forms):
                acc = acc + form.coefficients[j].scale(w)
            coeffs.append(acc)
        return [KernelForm(tuple(coeffs), None)]
    if not i_set:
        raise ShapeError("the index set of kernel columns is empty")
    picked = list(dict.fromkeys(int(i) for i in i_set))
    bad = [i for i in picked if not 0 <= i < len(forms)]
    if bad:
        raise ShapeError(f"kernel column indices {bad} out of range (corank is {len(forms)})")
    return [forms[i] for i in picked]


def _append(F: Sequence[MPoly], forms: Sequence[KernelForm], block_rows: Sequence[int],
            dedup_rtol: float) -> tuple[tuple[MPoly, ...], int]:
    """Append Λ(f_i) for rows outside the block; returns the system and how many were added.

    Block rows give Λ(f_i) = (J·λ)_i = 0 identically, so at most
    len(forms)·(N − r) candidates exist. Zeros and duplicates (up to scale) of
    anything already in the system are skipped.
    """
    seen = DistinctPolys(dedup_rtol)
    for f in F:
        seen.add(f)
    out = list(F)
    skip = set(block_rows)
    for i, f in enumerate(F):
        if i in skip:
            continue
        for form in forms:
            p = form.apply(f)
            if seen.add(p):
                out.append(p)
    return tuple(out), len(out) - len(F)


def deflate_once(F: Sequence[MPoly], xi: Sequence, i_set: Sequence[int] = (0,), weights: Sequence | None = None,
                 rtol: float = 1e-8, dedup_rtol: float = 1e-10) -> tuple[MPoly, ...]:
    """The i-deflated system {f, Λ_i^x(f) for i in i_set} (or a weighted combination of all forms)."""
    J = jacobian(F)
    Jx, report = _rank_at(J, xi, rtol)
    forms, rows, _ = _kernel_block(F, J, Jx, report)
    return _append(F, _select(forms, i_set, weights), rows, dedup_rtol)[0]


def random_weights(rng: np.random.Generator, count: int) -> list[Fraction]:
    """Small nonzero rationals p/q with 1 ≤ |p|, q ≤ 9."""
    out = []
    for _ in range(count):
        p = int(rng.integers(1, 10)) * (1 if rng.random() < 0.5 else -1)
        out.append(Fraction(p, int(rng.integers(1, 10))))
    return out


def polish(F: Sequence[MPoly], point: Sequence, steps: int = 5, seed: int = 0) -> np.ndarray:
    """A few damped Newton steps on a random square subsystem of F.

    The result is kept only if the residual of the whole system drops.
    """
    x = np.asarray([complex(v) for v in point], dtype=complex)
    res = float(np.linalg.norm(evaluate_system(F, x)))
    if res == 0.0 or steps <= 0:
        return x
    G = random_square_subsystem(F, seed=seed, identity_if_square=True)
    trace = newton_refine(G, x, max_iter=steps)
    trial = np.asarray(trace.point, dtype=complex)
    if float(np.linalg.norm(evaluate_system(F, trial))) < res:
        return trial
    log.debug(f"polish kept the point: {trace.message}")
    return x


def deflate_fully(F: Sequence[MPoly], xi: Sequence, strategy: str = "auto", i_set: Sequence[int] = (0,),
                  max_iter: int = 12, rtol: float = 1e-8, dedup_rtol: float = 1e-10,
                  polish_steps: int = 5, seed: int = 0) -> DeflationTrace:
    """Deflate until J(ξ̃) has full column rank.

    strategy "first" appends Λ_i^x(f) for i in `i_set`; "generic" appends one random
    rational combination of all kernel forms; "auto" is "generic" whenever there is
    more than one kernel form. The block of the previous step is kept while it still
    has rank r at ξ̃, so the same form applied to old rows only reproduces earlier
    additions. Each step adds at most |i|·(N − r) polynomials.
    """
    if strategy not in STRATEGIES:
        raise ShapeError(f"unknown deflation strategy {strategy!r}; expected one of {STRATEGIES}")
    n, _ = common_shape(F)
    if len(xi) != n:
        raise ShapeError(f"point has {len(xi)} coordinates, system has {n} variables")
    rng = np.random.default_rng(seed)
    current = tuple(F)
    point = np.asarray([complex(v) for v in xi], dtype=complex)
    systems, blocks, ranks, appended = [current], [], [], []
    points = [tuple(point)]

    for step in range(max_iter + 1):
        J = jacobian(current)
        Jx, report = _rank_at(J, point, rtol)
        ranks.append(report.rank)
        if report.rank == n:
            log.info(f"simple after {step} deflation step(s): {len(current)} polynomials")
            return DeflationTrace(systems=tuple(systems), blocks=tuple(blocks), ranks=tuple(ranks),
                                  appended=tuple(appended), points=tuple(points))
        if step == max_iter:
            break
        keep = blocks[-1] if blocks and _block_still_holds(Jx, blocks[-1], report) else None
        forms, rows, cols = _kernel_block(current, J, Jx, report, keep)
        generic = strategy in ("generic", "auto") and len(forms) > 1
        if generic:
            selected = _select(forms, weights=random_weights(rng, len(forms)))
        else:
            selected = _select(forms, i_set if strategy == "first" else (0,))
        current, added = _append(current, selected, rows, dedup_rtol)
        point = polish(current, point, polish_steps, seed)
        log.debug(f"step {step + 1}: rank {report.rank}, block {'kept' if keep else 'new'}, "
                  f"{added} added, {len(current)} polynomials")
        systems.append(current)
        blocks.append((rows, cols))
        appended.append(added)
        points.append(tuple(point))

    raise NumericalError(f"root still singular after {max_iter} deflation steps (ranks {ranks})")
