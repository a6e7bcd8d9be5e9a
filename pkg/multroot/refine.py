"""
Refinement of a simple root of an overdetermined deflated system.

A seeded random square subsystem (complex linear combinations of the equations, or
a plain row selection) keeps the root simple with probability one. Damped Newton
refines it. verify_simple_root then checks the residual and the smallest singular
value of the Jacobian.
"""
from __future__ import annotations
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence
import numpy as np

from .errors import ShapeError
from .linalg import numerical_rank
from .poly import CC, MPoly, common_shape, evaluate_matrix, evaluate_system, jacobian


log = logging.getLogger("multroot.refine")

MODES = ("combine", "select")


def _polys(system) -> tuple[MPoly, ...]:
    if isinstance(system, SquareSystem):
        return system.polynomials()
    if hasattr(system, "polynomials"):
        return tuple(system.polynomials)
    return tuple(system)


@dataclass(frozen=True)
class SquareSystem:
    """G = W · base (combine) or base[rows] (select / identity)."""
    base: tuple[MPoly, ...]
    weights: np.ndarray | None = field(default=None, repr=False)
    rows: tuple[int, ...] = ()

    @property
    def nvars(self) -> int:
        return self.base[0].nvars

    @cached_property
    def _jacobian(self) -> list[list[MPoly]]:
        return jacobian(self.base)

    def evaluate(self, point: Sequence) -> np.ndarray:
        values = evaluate_system(self.base, point)
        return self.weights @ values if self.weights is not None else values[list(self.rows)]

    def jacobian_at(self, point: Sequence) -> np.ndarray:
        J = evaluate_matrix(self._jacobian, point)
        return self.weights @ J if self.weights is not None else J[list(self.rows)]

    def scale(self) -> float:
        return max(1.0, max(p.coefficient_scale() for p in self.base))

    def polynomials(self) -> tuple[MPoly, ...]:
        """The square system written out."""
        if self.weights is None:
            return tuple(self.base[r] for r in self.rows)
        out = []
        for w in self.weights:
            acc = MPoly.zero(self.nvars, CC)
            for c, p in zip(w, self.base):
                acc = acc + p.to_domain(CC).scale(c)
            out.append(acc)
        return tuple(out)


def random_square_subsystem(D, seed: int = 0, mode: str = "combine", identity_if_square: bool = False) -> SquareSystem:
    """nvars equations from D; coefficients uniform on [−1, 1] + [−1, 1]·i."""
    polys = _polys(D)
    n, _ = common_shape(polys)
    if len(polys) < n:
        raise ShapeError(f"{len(polys)} equations cannot give a square system in {n} variables")
    if mode not in MODES:
        raise ShapeError(f"unknown subsystem mode {mode!r}; expected one of {MODES}")
    if identity_if_square and len(polys) == n:
        return SquareSystem(base=polys, rows=tuple(range(n)))
    rng = np.random.default_rng(seed)
    if mode == "select":
        rows = tuple(sorted(int(r) for r in rng.choice(len(polys), size=n, replace=False)))
        return SquareSystem(base=polys, rows=rows)
    W = rng.uniform(-1, 1, (n, len(polys))) + 1j * rng.uniform(-1, 1, (n, len(polys)))
    return SquareSystem(base=polys, weights=W)


@dataclass(frozen=True)
class RefinementTrace:
    iterates: tuple[tuple[complex, ...], ...]
    residuals: tuple[float, ...]
    steps: tuple[float, ...]
    converged: bool
    sigma_min: float
    message: str = ""

    @property
    def point(self) -> tuple[complex, ...]:
        return self.iterates[-1]

    @property
    def iterations(self) -> int:
        return len(self.steps)


def newton_refine(G: SquareSystem, start: Sequence, max_iter: int = 20, tol: float = 1e-12,
                  max_halvings: int = 8) -> RefinementTrace:
    """Damped Newton: the step is halved (up to `max_halvings` times) while the residual grows."""
    x = np.asarray([complex(v) for v in start], dtype=complex)
    if x.shape != (G.nvars,):
        raise ShapeError(f"start has {x.size} coordinates, system has {G.nvars} variables")
    scale = G.scale()
    Fx = G.evaluate(x)
    res = float(np.linalg.norm(Fx))
    iterates, residuals, steps = [tuple(x)], [res], []
    converged, message = False, "iteration limit reached"

    for it in range(max_iter):
        J = G.jacobian_at(x)
        try:
            dx = np.linalg.solve(J, -Fx)
        except np.linalg.LinAlgError:
            message = f"singular Jacobian at iterate {it}"
            log.warning(message)
            break
        lam = 1.0
        trial = x + dx
        trial_res = float(np.linalg.norm(G.evaluate(trial)))
        for _ in range(max_halvings):
            if trial_res <= res:
                break
            lam /= 2
            trial = x + lam * dx
            trial_res = float(np.linalg.norm(G.evaluate(trial)))
        step = float(np.linalg.norm(lam * dx))
        x, Fx, res = trial, G.evaluate(trial), trial_res
        iterates.append(tuple(x))
        residuals.append(res)
        steps.append(step)
        log.debug(f"newton {it + 1}: step {step:.3e}, residual {res:.3e}")
        if step <= tol * max(1.0, float(np.linalg.norm(x))) and res <= tol * scale:
            converged, message = True, f"converged in {it + 1} iteration(s)"
            break

    s = np.linalg.svd(G.jacobian_at(x), compute_uv=False)
    return RefinementTrace(iterates=tuple(iterates), residuals=tuple(residuals), steps=tuple(steps),
                           converged=converged, sigma_min=float(s[-1]), message=message)


@dataclass(frozen=True)
class SimpleRootReport:
    residual: float
    sigma_min: float
    rank: int
    nvars: int
    simple: bool


def verify_simple_root(system, point: Sequence, tol: float = 1e-8, rank_rtol: float = 1e-8) -> SimpleRootReport:
    """Simple iff the residual is within tol and the Jacobian has full column rank."""
    pt = [complex(v) for v in point]
    if isinstance(system, SquareSystem):
        nvars = system.nvars
        if len(pt) != nvars:
            raise ShapeError(f"point has {len(pt)} coordinates, system has {nvars} variables")
        values, J = system.evaluate(pt), system.jacobian_at(pt)
    else:
        polys = _polys(system)
        nvars, _ = common_shape(polys)
        if len(pt) != nvars:
            raise ShapeError(f"point has {len(pt)} coordinates, system has {nvars} variables")
        values, J = evaluate_system(polys, pt), evaluate_matrix(jacobian(polys), pt)
    residual = float(np.linalg.norm(values))
    report = numerical_rank(J, rtol=rank_rtol, atol=rank_rtol)
    return SimpleRootReport(residual=residual, sigma_min=report.sigma_min, rank=report.rank, nvars=nvars,
                            simple=residual <= tol and report.rank == nvars)
