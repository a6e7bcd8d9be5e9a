"""
Benchmark over the suite declared in config.yaml.

Each suite entry runs one or more methods:
    dual          δ, o from the Macaulay dual space
    deflate1      first-order deflation to a simple root (polys / vars / iterations)
    deflate-mult  parametric multiplication-matrix system (polys / vars)

Rows come back in suite order whatever the worker count.
"""
from __future__ import annotations
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence
import pandas as pd

from .config import BenchEntry, Config
from .deflation import deflate_fully
from .dual import compute_dual_space, orthogonal_primal_dual
from .errors import MultrootError
from .io import document, parse_basis, write_json
from .multmatrix import build_deflated_system, exponent_sets
from . import systems


log = logging.getLogger("multroot.bench")

METHODS = ("dual", "deflate1", "deflate-mult")


@dataclass(frozen=True)
class BenchRow:
    id: str
    method: str
    multiplicity: int | None
    nil_index: int | None
    nvars: int | None
    npolys: int | None
    iterations: int | None
    seconds: float
    status: str
    message: str = ""


def _row(entry: BenchEntry, method: str, cfg: Config) -> BenchRow:
    tol = cfg.tolerances
    t0 = time.perf_counter()
    delta = o = nvars = npolys = iterations = None
    try:
        sysfile = systems.load(f"family:{entry.family}" if entry.family is not None else entry.path)
        F, xi = sysfile.polynomials, sysfile.root
        o = entry.nil_index
        if method == "dual":
            D = compute_dual_space(F, xi, tol=tol.dual_rtol, t_max=tol.max_order, residual_tol=tol.residual_tol)
            delta, o = D.multiplicity, D.nil_index
        elif method == "deflate1":
            trace = deflate_fully(F, xi, strategy=cfg.deflation.strategy, i_set=cfg.deflation.i_set,
                                  max_iter=tol.max_deflations, rtol=tol.rank_rtol, dedup_rtol=tol.dedup_rtol,
                                  polish_steps=tol.polish_steps, seed=cfg.refine.seed)
            nvars, npolys, iterations = sysfile.nvars, len(trace.final), trace.iterations
        elif method == "deflate-mult":
            if entry.basis is not None:
                E = parse_basis(entry.basis, sysfile.names)
            elif sysfile.basis is not None:
                E = sysfile.basis
            else:
                D = compute_dual_space(F, xi, tol=tol.dual_rtol, t_max=tol.max_order,
                                       residual_tol=tol.residual_tol)
                E, o = orthogonal_primal_dual(D, tol=tol.dual_rtol).exponents, D.nil_index
            S = exponent_sets(E)
            DS = build_deflated_system(F, S, reduce=entry.reduce_params, names=sysfile.names,
                                       dedup_rtol=tol.dedup_rtol)
            delta, nvars, npolys = S.delta, DS.nvars, DS.count
        else:
            raise ValueError(f"unknown bench method {method!r}; expected one of {METHODS}")
        status, message = "ok", ""
    except (MultrootError, ValueError) as e:
        log.error(f"[{entry.id}/{method}]  FAILED: {e}")
        status, message = "error", str(e)
    seconds = time.perf_counter() - t0
    log.info(f"[{entry.id}/{method}]  {status} in {seconds:.2f}s")
    return BenchRow(id=entry.id, method=method, multiplicity=delta, nil_index=o, nvars=nvars, npolys=npolys,
                    iterations=iterations, seconds=seconds, status=status, message=message)


def _entry_rows(entry: BenchEntry, cfg: Config) -> list[BenchRow]:
    return [_row(entry, m, cfg) for m in entry.methods]


def run_bench(cfg: Config, entries: Sequence[BenchEntry] | None = None, workers: int | None = None) -> pd.DataFrame:
    entries = list(cfg.bench_suite if entries is None else entries)
    workers = workers or cfg.bench_workers
    log.info(f"Benchmarking {len(entries)} system(s) with {workers} worker(s)")
    if workers == 1:
        per_entry = [_entry_rows(e, cfg) for e in entries]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_entry = list(pool.map(lambda e: _entry_rows(e, cfg), entries))
    rows = [asdict(r) for rs in per_entry for r in rs]
    columns = list(BenchRow.__dataclass_fields__)
    return pd.DataFrame(rows, columns=columns).astype({c: "Int64" for c in
                                                        ("multiplicity", "nil_index", "nvars", "npolys", "iterations")})


def write_bench(df: pd.DataFrame, output_dir: str | Path) -> tuple[Path, Path]:
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    records = [{k: (None if pd.isna(v) else v) for k, v in r.items()} for r in df.to_dict(orient="records")]
    json_path = write_json(document("bench", rows=records), out / "bench.json")
    parquet_path = out / "bench.parquet"
    df.to_parquet(parquet_path, index=False)
    return json_path, parquet_path


def print_summary(df: pd.DataFrame) -> None:
    print("\n── Summary ──────────────────────────────────────────────────────────")
    print(f"  {'':2} {'system':<16} {'method':<13} {'δ':>4} {'o':>3} {'vars':>5} {'poly':>5} {'it':>3} {'time':>8}")
    for r in df.itertuples(index=False):
        icon = {"ok": "✓", "error": "✗"}.get(r.status, "?")
        cells = [("" if pd.isna(v) else str(int(v))) for v in
                 (r.multiplicity, r.nil_index, r.nvars, r.npolys, r.iterations)]
        print(f"  {icon:<2} {r.id:<16} {r.method:<13} {cells[0]:>4} {cells[1]:>3} {cells[2]:>5} "
              f"{cells[3]:>5} {cells[4]:>3} {r.seconds:>7.2f}s")
    print("─────────────────────────────────────────────────────────────────────")
