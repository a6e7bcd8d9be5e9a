"""
Benchmark systems: the breadth-two family and the files under systems/.
"""
from __future__ import annotations
from pathlib import Path

from .errors import ParseError, ShapeError
from .io import SystemFile, parse_system
from .poly import QQ, Exponent, MPoly


SUITE_DIR = Path(__file__).resolve().parent.parent / "systems"


def gen_family(n: int) -> SystemFile:
    """x1³+x1²−x2², x_i³+x_i²−x_{i+1} (1 < i < n), x_n²; a 2^n-fold root at the origin."""
    if n < 2:
        raise ShapeError(f"the family needs n ≥ 2, got {n}")
    x = [MPoly.variable(n, i, QQ) for i in range(n)]
    polys = [x[0] ** 3 + x[0] ** 2 - x[1] ** 2]
    polys += [x[i] ** 3 + x[i] ** 2 - x[i + 1] for i in range(1, n - 1)]
    polys.append(x[n - 1] ** 2)
    return SystemFile(path=f"family:{n}", names=tuple(f"x{i + 1}" for i in range(n)), polynomials=tuple(polys),
                      root=(0,) * n, basis=family_basis(n))


def family_basis(n: int) -> tuple[Exponent, ...]:
    """{x1^a x2^b : a < 2^(n−1), b < 2}."""
    if n < 2:
        raise ShapeError(f"the family needs n ≥ 2, got {n}")
    rest = (0,) * (n - 2)
    return tuple((a, b) + rest for b in range(2) for a in range(2 ** (n - 1)))


def suite_path(name: str) -> Path:
    p = Path(name)
    if p.exists():
        return p
    p = SUITE_DIR / (name if name.endswith(".sys") else f"{name}.sys")
    if not p.exists():
        raise ParseError(f"no system {name!r} (looked in {SUITE_DIR})")
    return p


def load(name: str) -> SystemFile:
    """A path, a suite name such as "caprasse", or "family:N"."""
    if name.startswith("family:"):
        try:
            n = int(name.split(":", 1)[1])
        except ValueError:
            raise ParseError(f"bad family size in {name!r}") from None
        return gen_family(n)
    return parse_system(suite_path(name))
