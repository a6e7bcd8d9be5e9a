"""
Command-line driver.

Usage:
    python -m multroot analyze systems/illustrative.sys
    python -m multroot deflate1 multi_iter_2 --strategy first --i-set 1 --json out/trace.json
    python -m multroot deflate-mult family:3 --reduce-params true
    python -m multroot refine caprasse --basis "1; x1; x2; x1*x2" --seed 7
    python -m multroot bench --output out/bench --workers 4

SYSTEM is a path, a file name under systems/ ("caprasse"), or "family:N".
Exit status: 0 on success, 2 for bad input, 3 when a numerical decision fails.
"""
from __future__ import annotations
import argparse
import logging
import sys
from pathlib import Path

from .bench import print_summary, run_bench, write_bench
from .config import Config
from .deflation import deflate_fully
from .dual import compute_dual_space, orthogonal_primal_dual
from .errors import MultrootError, ShapeError, exit_code
from .io import SystemFile, document, parse_basis, point_to_json, poly_to_json, write_json
from .multmatrix import build_deflated_system, dual_from_matrices, exponent_sets, mu_values
from .refine import newton_refine, random_square_subsystem, verify_simple_root
from . import systems


log = logging.getLogger("multroot.cli")

if sys.platform.startswith("win"):
    try:
        sys.stdout.reconfigure(encoding="utf-8")
        sys.stderr.reconfigure(encoding="utf-8")
    except AttributeError:
        pass


# ── Argument types ───────────────────────────────────────────────────────────
def parse_bool(text: str) -> bool:
    v = text.strip().lower()
    if v in ("true", "yes", "1", "on"):
        return True
    if v in ("false", "no", "0", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected true/false, got {text!r}")


def parse_i_set(text: str) -> tuple[int, ...]:
    """'1,3' (1-based, as in the usual notation) → (0, 2)."""
    try:
        picked = [int(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a list of column numbers, got {text!r}") from None
    if not picked or any(i < 1 for i in picked):
        raise argparse.ArgumentTypeError(f"column numbers start at 1, got {text!r}")
    return tuple(i - 1 for i in picked)


def _fmt(v) -> str:
    z = complex(v)
    if z.imag == 0:
        return f"{z.real:.16g}"
    return f"{z.real:.16g}{z.imag:+.16g}i"


# ── Commands ─────────────────────────────────────────────────────────────────
def _settings(args, cfg: Config, sysfile: SystemFile | None = None) -> Config:
    dual = args.tol if args.tol is not None else (sysfile.tol if sysfile else None)
    rank = args.rank_tol if args.rank_tol is not None else (sysfile.rank_tol if sysfile else None)
    return cfg.with_overrides(dual_rtol=dual, rank_rtol=rank)


def _basis(args, sysfile: SystemFile):
    if getattr(args, "basis", None):
        return parse_basis(args.basis, sysfile.names)
    return sysfile.basis


def cmd_analyze(args, cfg: Config) -> dict:
    sysfile = systems.load(args.system)
    tol = _settings(args, cfg, sysfile).tolerances
    D = compute_dual_space(sysfile.polynomials, sysfile.root, tol=tol.dual_rtol, t_max=tol.max_order,
                           residual_tol=tol.residual_tol)
    pair = orthogonal_primal_dual(D, _basis(args, sysfile), tol=tol.dual_rtol)
    print(f"{sysfile.path}: δ = {D.multiplicity}, o = {D.nil_index}, breadth = {D.breadth}")
    print(f"  dim D_t: {list(D.dimensions)}")
    print(f"  E: {[list(a) for a in pair.exponents]}")
    for alpha, L in zip(pair.exponents, pair.basis):
        print(f"  Λ{list(alpha)} = {L.to_str()}")
    return document(
        "dual-space", system=sysfile.path, variables=list(sysfile.names), root=point_to_json(sysfile.root),
        multiplicity=D.multiplicity, nil_index=D.nil_index, breadth=D.breadth, dimensions=list(D.dimensions),
        exponents=[list(a) for a in pair.exponents],
        basis=[{"exponent": list(a), "terms": [[list(g), [c.real, c.imag]] for g, c in L.terms.items()],
                "text": L.to_str()} for a, L in zip(pair.exponents, pair.basis)],
    )


def cmd_deflate1(args, cfg: Config) -> dict:
    sysfile = systems.load(args.system)
    cfg = _settings(args, cfg, sysfile)
    tol = cfg.tolerances
    trace = deflate_fully(sysfile.polynomials, sysfile.root,
                          strategy=args.strategy or cfg.deflation.strategy,
                          i_set=args.i_set or cfg.deflation.i_set, max_iter=tol.max_deflations,
                          rtol=tol.rank_rtol, dedup_rtol=tol.dedup_rtol, polish_steps=tol.polish_steps,
                          seed=args.seed if args.seed is not None else cfg.refine.seed)
    names = sysfile.names
    print(f"{sysfile.path}: simple after {trace.iterations} step(s); "
          f"{len(trace.final)} polynomials in {len(names)} variables")
    print(f"  Jacobian ranks: {list(trace.ranks)}")
    for f in trace.final:
        print(f"  {f.to_str(names)}")
    report = verify_simple_root(trace.final, trace.points[-1], tol=tol.residual_tol, rank_rtol=tol.rank_rtol)
    print(f"  {'✓' if report.simple else '✗'} σ_min = {report.sigma_min:.3e}, residual = {report.residual:.3e}")
    return document(
        "deflation-trace", system=sysfile.path, variables=list(names), iterations=trace.iterations,
        ranks=list(trace.ranks), appended=list(trace.appended),
        blocks=[{"rows": list(r), "cols": list(c)} for r, c in trace.blocks],
        points=[point_to_json(p) for p in trace.points],
        systems=[[poly_to_json(f, names) for f in s] for s in trace.systems],
        final=[poly_to_json(f, names) for f in trace.final],
    )


def _deflated(args, cfg: Config, sysfile: SystemFile):
    tol = cfg.tolerances
    basis = _basis(args, sysfile)
    D = pair = None
    if basis is None or args.command == "refine":
        D = compute_dual_space(sysfile.polynomials, sysfile.root, tol=tol.dual_rtol, t_max=tol.max_order,
                               residual_tol=tol.residual_tol)
        pair = orthogonal_primal_dual(D, basis, tol=tol.dual_rtol)
        basis = pair.exponents
    S = exponent_sets(basis)
    reduce = args.reduce_params if args.reduce_params is not None else False
    DS = build_deflated_system(sysfile.polynomials, S, reduce=reduce, names=sysfile.names,
                               fold_signs=not args.ordered_pairs, dedup_rtol=tol.dedup_rtol)
    return S, DS, D, pair


def _system_doc(sysfile: SystemFile, S, DS) -> dict:
    return dict(
        system=sysfile.path, variables=list(DS.variables), exponents=[list(a) for a in S.exponents],
        border=[list(b) for b in S.border],
        parameters=[{"alpha": list(a), "beta": list(b)} for a, b in DS.matrices.registry],
        count=DS.count, nvars=DS.nvars,
        equations=[{"source": e.source, "index": list(e.index), "poly": poly_to_json(e.poly, DS.variables)}
                   for e in DS.equations],
    )


def cmd_deflate_mult(args, cfg: Config) -> dict:
    sysfile = systems.load(args.system)
    cfg = _settings(args, cfg, sysfile)
    S, DS, _, _ = _deflated(args, cfg, sysfile)
    print(f"{sysfile.path}: E = {[list(a) for a in S.exponents]}, |∂(E)| = {len(S.border)}")
    print(f"  {DS.count} polynomials in {DS.nvars} variables ({DS.nparams} parameters)")
    for e in DS.equations:
        print(f"  [{e.source}] {e.poly.to_str(DS.variables)}")
    return document("deflated-system", **_system_doc(sysfile, S, DS))


def cmd_refine(args, cfg: Config) -> dict:
    sysfile = systems.load(args.system)
    cfg = _settings(args, cfg, sysfile)
    tol = cfg.tolerances
    S, DS, D, pair = _deflated(args, cfg, sysfile)
    n = sysfile.nvars
    start = [complex(v) for v in sysfile.root] + list(mu_values(pair, DS.matrices))
    seed = args.seed if args.seed is not None else cfg.refine.seed
    G = random_square_subsystem(DS, seed=seed, mode=args.mode or cfg.refine.mode)
    trace = newton_refine(G, start, max_iter=tol.newton_max_iter, tol=tol.newton_tol)
    report = verify_simple_root(DS, trace.point, tol=tol.residual_tol, rank_rtol=tol.rank_rtol)
    z, mu = trace.point[:n], trace.point[n:]
    recovered = dual_from_matrices(DS.matrices.evaluate(mu), S, D.nil_index, z, tol=tol.commute_tol)

    icon = "✓" if trace.converged and report.simple else "✗"
    print(f"{sysfile.path}: {icon} {trace.message}; {DS.count} polynomials in {DS.nvars} variables")
    print(f"  point: ({', '.join(_fmt(v) for v in z)})")
    print(f"  residuals: {', '.join(f'{r:.2e}' for r in trace.residuals)}")
    print(f"  σ_min = {report.sigma_min:.3e} (rank {report.rank}/{report.nvars})")
    for alpha, L in zip(recovered.exponents, recovered.basis):
        print(f"  Λ{list(alpha)} = {L.to_str()}")
    return document(
        "refinement", system=sysfile.path, variables=list(DS.variables), seed=seed,
        start=point_to_json(start), point=point_to_json(z), parameters=point_to_json(mu),
        iterations=trace.iterations, residuals=list(trace.residuals), steps=list(trace.steps),
        converged=trace.converged, sigma_min=report.sigma_min, residual=report.residual, simple=report.simple,
        exponents=[list(a) for a in recovered.exponents],
        basis=[L.to_str() for L in recovered.basis],
    )


def cmd_bench(args, cfg: Config) -> dict:
    if not cfg.bench_suite:
        raise ShapeError("config has no bench suite")
    cfg = _settings(args, cfg)
    df = run_bench(cfg, workers=args.workers)
    json_path, parquet_path = write_bench(df, args.output)
    print_summary(df)
    print(f"\n✓ Wrote {json_path} and {parquet_path}")
    failed = df[df["status"] != "ok"]
    if not failed.empty:
        log.error(f"Failed rows: {list(zip(failed['id'], failed['method']))}")
    return {}


COMMANDS = {
    "analyze": cmd_analyze,
    "deflate1": cmd_deflate1,
    "deflate-mult": cmd_deflate_mult,
    "refine": cmd_refine,
    "bench": cmd_bench,
}


# ── Parser ───────────────────────────────────────────────────────────────────
def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default="config.yaml", help="YAML config (default: config.yaml if present)")
    common.add_argument("--tol", type=float, help="dual-space null tolerance, relative")
    common.add_argument("--rank-tol", type=float, help="Jacobian rank tolerance, relative")
    common.add_argument("--seed", type=int, help="seed for random weights and square subsystems")
    common.add_argument("--json", metavar="PATH", help="also write the result as JSON")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    common.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")

    parser = argparse.ArgumentParser(prog="multroot",
                                     description="Multiplicity structure and deflation of singular roots")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="dual space, δ, o and primal basis")
    p.add_argument("system")
    p.add_argument("--basis", help='primal exponents, e.g. "0 0; 0 1" or "1; x2"')

    p = sub.add_parser("deflate1", parents=[common], help="first-order deflation to a simple root")
    p.add_argument("system")
    p.add_argument("--i-set", type=parse_i_set, help="kernel columns for --strategy first, 1-based (default: 1)")
    p.add_argument("--strategy", choices=["auto", "first", "generic"])

    for name, text in (("deflate-mult", "parametric multiplication-matrix system"),
                       ("refine", "Newton on the root and its multiplicity structure")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("system")
        p.add_argument("--basis", help='primal exponents, e.g. "0 0; 0 1" or "1; x2"')
        p.add_argument("--reduce-params", type=parse_bool, help="eliminate parameters fixed by commutators")
        p.add_argument("--ordered-pairs", action="store_true",
                       help="commutators for every ordered pair i ≠ j, exact dedup only")
        if name == "refine":
            p.add_argument("--mode", choices=["combine", "select"], help="how the square subsystem is formed")

    p = sub.add_parser("bench", parents=[common], help="run the suite from the config")
    p.add_argument("--output", default="out/bench", help="directory for bench.json and bench.parquet")
    p.add_argument("--workers", type=int, help="parallel workers (default from config)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s  %(levelname)-7s  %(message)s", datefmt="%H:%M:%S")

    try:
        cfg = Config.from_yaml(args.config) if Path(args.config).exists() else Config()
        doc = COMMANDS[args.command](args, cfg)
    except MultrootError as e:
        log.error(str(e))
        return exit_code(e)
    if args.json and doc:
        write_json(doc, args.json)
        print(f"✓ Wrote {args.json}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
