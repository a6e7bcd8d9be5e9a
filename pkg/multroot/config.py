"""
Run configuration loaded from config.yaml.

Every field has a default, so Config() works without a file. Command-line flags
override whatever the file says.
"""
from __future__ import annotations
from dataclasses import dataclass, field, replace
from pathlib import Path
import yaml

from .errors import ShapeError


@dataclass(frozen=True)
class Tolerances:
    dual_rtol: float = 1e-8          # null-space cut, relative to max |Macaulay entry|
    rank_rtol: float = 1e-8          # Jacobian rank cut, relative to σ_max
    residual_tol: float = 1e-6       # |f(ξ̃)| accepted as a root
    newton_tol: float = 1e-12
    newton_max_iter: int = 20
    dedup_rtol: float = 1e-10
    commute_tol: float = 1e-8
    max_order: int = 16              # t_max for the dual space
    max_deflations: int = 12
    polish_steps: int = 5


@dataclass(frozen=True)
class DeflationSettings:
    strategy: str = "auto"           # auto | first | generic
    i_set: tuple[int, ...] = (0,)    # 0-based kernel columns


@dataclass(frozen=True)
class RefineSettings:
    seed: int = 0
    mode: str = "combine"            # combine | select


@dataclass(frozen=True)
class BenchEntry:
    id: str
    path: str | None = None
    family: int | None = None
    methods: tuple[str, ...] = ("dual", "deflate1")
    basis: str | None = None
    reduce_params: bool = False
    nil_index: int | None = None

    def __post_init__(self):
        if (self.path is None) == (self.family is None):
            raise ShapeError(f"bench entry {self.id!r} needs exactly one of 'path' or 'family'")


@dataclass(frozen=True)
class Config:
    tolerances: Tolerances = field(default_factory=Tolerances)
    deflation: DeflationSettings = field(default_factory=DeflationSettings)
    refine: RefineSettings = field(default_factory=RefineSettings)
    bench_suite: tuple[BenchEntry, ...] = ()
    bench_workers: int = 1

    @classmethod
    def from_yaml(cls, path: str | Path) -> "Config":
        cfg = yaml.safe_load(Path(path).read_text()) or {}
        t = cfg.get("tolerances", {})
        d0 = Tolerances()
        tolerances = Tolerances(
            dual_rtol=float(t.get("dual_rtol", d0.dual_rtol)),
            rank_rtol=float(t.get("rank_rtol", d0.rank_rtol)),
            residual_tol=float(t.get("residual_tol", d0.residual_tol)),
            newton_tol=float(t.get("newton_tol", d0.newton_tol)),
            newton_max_iter=int(t.get("newton_max_iter", d0.newton_max_iter)),
            dedup_rtol=float(t.get("dedup_rtol", d0.dedup_rtol)),
            commute_tol=float(t.get("commute_tol", d0.commute_tol)),
            max_order=int(t.get("max_order", d0.max_order)),
            max_deflations=int(t.get("max_deflations", d0.max_deflations)),
            polish_steps=int(t.get("polish_steps", d0.polish_steps)),
        )
        d = cfg.get("deflation", {})
        deflation = DeflationSettings(
            strategy=str(d.get("strategy", "auto")),
            i_set=tuple(int(i) for i in d.get("i_set", [0])),
        )
        r = cfg.get("refine", {})
        refine = RefineSettings(seed=int(r.get("seed", 0)), mode=str(r.get("mode", "combine")))
        b = cfg.get("bench", {})
        suite = tuple(
            BenchEntry(
                id=str(e["id"]),
                path=e.get("path"),
                family=int(e["family"]) if "family" in e else None,
                methods=tuple(e.get("methods", ["dual", "deflate1"])),
                basis=e.get("basis"),
                reduce_params=bool(e.get("reduce_params", False)),
                nil_index=int(e["nil_index"]) if "nil_index" in e else None,
            )
            for e in b.get("suite", [])
        )
        return cls(tolerances=tolerances, deflation=deflation, refine=refine,
                   bench_suite=suite, bench_workers=int(b.get("workers", 1)))

    def with_overrides(self, **tol) -> "Config":
        """Copy with the given tolerance fields replaced; None values are ignored."""
        changes = {k: v for k, v in tol.items() if v is not None}
        return replace(self, tolerances=replace(self.tolerances, **changes)) if changes else self
