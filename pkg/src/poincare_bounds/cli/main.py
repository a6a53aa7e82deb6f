"""Command-line interface.

    poincare-bounds geometry --family quadric --levels 1,2,3 --delta 0.4
    poincare-bounds map      --family koch-T --levels 0-2
    poincare-bounds assemble --family koch-H --levels 1 --order 5 --refinements 3 --out mats
    poincare-bounds bounds   --family koch --levels 0,1 --refinements 4 --out results
    poincare-bounds table    --input results/results.json --out results
    poincare-bounds rate-fit --input results/results.json
    poincare-bounds oracle   --trials 100

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 geometric hypothesis violated.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from ..errors import BoundsError, ConfigError
from .config import load_config


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML run configuration")
    p.add_argument("--family", help="koch, koch-T, koch-H, quadric or gosper")
    p.add_argument("--levels", help="e.g. 0,1,2 or 0-4")
    p.add_argument("--delta", type=float, help="interpolation parameter (quadric, gosper)")
    p.add_argument("--order", type=int, dest="fem_order", help="Lagrange order p (1..8)")
    p.add_argument("--refinements", help="e.g. 4 or 0:4,1:5")
    p.add_argument("--b", type=float, dest="b_override", help="right end of the enclosure interval")
    p.add_argument("--out", dest="output_dir", help="output directory")
    p.add_argument("--cache", dest="cache_dir", help="map cache directory")
    p.add_argument("--jobs", type=int, help="worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="poincare-bounds", description=__doc__.split("\n")[0] or None,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [("geometry", "build prefractals and check the geometric hypotheses"),
                        ("map", "solve and cache the Schwarz-Christoffel maps"),
                        ("assemble", "export the pencil matrices in Matrix Market format"),
                        ("bounds", "compute eigenvalue enclosures and write tables")]:
        _common(sub.add_parser(name, help=help_))
    t = sub.add_parser("table", help="re-emit tables and plot from a results file")
    t.add_argument("--input", required=True)
    t.add_argument("--out", dest="output_dir", default=None)
    r = sub.add_parser("rate-fit", help="fit r(j) = C rho^j to a results file")
    r.add_argument("--input", required=True)
    o = sub.add_parser("oracle", help="check the block-operator identities on random matrices")
    o.add_argument("--trials", type=int, default=100)
    o.add_argument("--max-size", type=int, default=12)
    o.add_argument("--seed", type=int, default=0)
    return parser


def _config(args):
    keys = ("family", "levels", "delta", "fem_order", "refinements", "b_override", "output_dir", "cache_dir", "jobs")
    return load_config(args.config, **{k: getattr(args, k) for k in keys})


def cmd_geometry(args) -> int:
    from ..geometry import koch_inner, koch_outer, koch_pair, verify_koch_nesting
    from .pipeline import check_geometry, require_hypothesis

    cfg = _config(args)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.family.startswith("koch"):
        for j in cfg.levels:
            for side, gen in (("T", koch_inner), ("H", koch_outer)):
                (out / f"{side}{j}.json").write_text(gen(j).to_json())
        for j in cfg.levels:
            rep = verify_koch_nesting(koch_pair(j), koch_pair(j + 1))
            print(json.dumps({"level": j, "inclusions": rep.inclusions, "collar_ok": rep.collar_ok,
                              "collar_depth": rep.collar_depth}))
        return 0
    report = check_geometry(cfg)
    print(json.dumps(report.as_dict(), indent=1))
    require_hypothesis(report)
    return 0


def cmd_map(args) -> int:
    from .pipeline import solve_map

    cfg = _config(args)
    for side in cfg.sides or ("T", "H"):
        for j in cfg.levels:
            sol = solve_map(side, j, cfg.cache_dir)
            print(json.dumps({"domain": f"{side}{j}", "n": sol.n, "residual": sol.residual,
                              "iterations": len(sol.history)}))
    return 0


def cmd_assemble(args) -> int:
    from ..fem import MapWeight, assemble_pencil, uniform_mesh
    from .pipeline import SIDES, composite_map

    cfg = _config(args)
    for side in cfg.sides:
        for j in cfg.levels:
            cmap = composite_map(side, j, cfg.cache_dir)
            mesh = uniform_mesh(SIDES[side][1], cfg.refinement(j))
            pencil = assemble_pencil(mesh, cfg.fem_order, MapWeight(cmap), level=j)
            target = Path(cfg.output_dir) / f"{side}{j}"
            pencil.export_matrix_market(target)
            (target / "mesh.json").write_text(mesh.to_json())
            (target / "metadata.json").write_text(json.dumps(pencil.metadata, indent=1))
            print(f"{side}{j}: d={pencil.dimension} -> {target}")
    return 0


def cmd_bounds(args) -> int:
    from .pipeline import fractal_bounds, run_pipeline
    from .report import emit_table

    cfg = _config(args)
    results = run_pipeline(cfg)
    for r in results:
        for side in ("T", "H"):
            s = r.side(side)
            if s is not None:
                e = s.enclosure
                print(f"{side}{r.level}  R={e.refinement}  [{e.sq_lower:.10f}, {e.sq_upper:.10f}]  width {e.width:.2e}")
        for flag in r.flags:
            print(f"  warning: {flag}")
    if len(cfg.sides) == 2:
        lo, hi = fractal_bounds(results)
        print(f"snowflake: {lo:.10f} <= omega_1^2 <= {hi:.10f}")
    for path in emit_table(results, cfg.output_dir):
        print(f"wrote {path}")
    return 0


def cmd_table(args) -> int:
    from .report import emit_table, load_results

    results = load_results(args.input)
    out = args.output_dir or str(Path(args.input).parent)
    for path in emit_table(results, out):
        print(f"wrote {path}")
    return 0


def cmd_rate_fit(args) -> int:
    from .report import load_results, rate_fit

    fit = rate_fit(load_results(args.input))
    print(json.dumps(fit.as_dict()))
    return 0


def cmd_oracle(args) -> int:
    from ..spectral.oracle import block_operator_oracle

    rng = np.random.default_rng(args.seed)
    failures = 0
    for _ in range(args.trials):
        m, n = rng.integers(1, args.max_size + 1, size=2)
        T = rng.standard_normal((m, n))
        if rng.random() < 0.5 and min(m, n) > 1:
            # force a rank deficiency
            k = int(rng.integers(1, min(m, n)))
            T = rng.standard_normal((m, k)) @ rng.standard_normal((k, n))
        rep = block_operator_oracle(T)
        failures += not rep.passed
    print(json.dumps({"trials": args.trials, "failures": failures}))
    return 0 if failures == 0 else 3


COMMANDS = {
    "geometry": cmd_geometry, "map": cmd_map, "assemble": cmd_assemble, "bounds": cmd_bounds,
    "table": cmd_table, "rate-fit": cmd_rate_fit, "oracle": cmd_oracle,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except BoundsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
