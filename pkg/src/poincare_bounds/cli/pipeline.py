"""The end-to-end workflow: geometry, maps, pencils, enclosures.

Koch prefractals T_j (inner) and H_j (outer) are transplanted onto the base
triangle T_0 and hexagon H_0.  Domain monotonicity then gives

    omega_1^2(H_j) <= omega_1^2(snowflake) <= omega_1^2(T_j).
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__
from ..conformal.composite import CompositeMap
from ..conformal.sc import PrevertexSolution, side_length_residual, solve_parameter_problem
from ..conformal.singularity import assumption_b, koch_matching, singularity_exponents
from ..errors import BoundsError, ConfigError, GeometryError, HypothesisViolation, UnsupportedFamily
from ..fem.assemble import MapWeight, assemble_pencil
from ..fem.mesh import uniform_mesh
from ..geometry.hypothesis import verify_hypothesis_g
from ..geometry.koch import koch_inner, koch_outer
from ..geometry.lsystem import family_by_name
from ..spectral.enclosure import Enclosure, default_b, enclosure_from_point, select_ground_point
from ..spectral.qep import ground_shift, solve_qep
from .config import RunConfig

log = logging.getLogger(__name__)

MAP_TOL = 1e-12
RELOAD_TOL = 1e-9
SIDES = {"T": (koch_inner, "triangle", 3), "H": (koch_outer, "hexagon", 6)}


def omega2_triangle() -> float:
    """Second Dirichlet frequency of T_0 (side sqrt 3): omega^2 = 16 pi^2 7/27."""
    return float(np.sqrt(16 * np.pi ** 2 * 7 / 27))


def default_b_for(side: str, level: int) -> float:
    """b for the enclosure disk.

    Every T_j (j >= 1) and H_j lies in the unit disk, so 0.995 omega_2(disk)
    works; T_0 itself has omega_1 = 4 pi/3 above that and uses 0.995 omega_2(T_0).
    """
    if side == "T" and level == 0:
        return 0.995 * omega2_triangle()
    return default_b()


# ---------------------------------------------------------------- caching

def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


@contextmanager
def _locked(path: Path):
    """Advisory per-key lock (POSIX); a no-op where fcntl is unavailable."""
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        import fcntl
    except ImportError:  # pragma: no cover
        yield
        return
    with open(str(path) + ".lock", "w") as fh:
        fcntl.flock(fh, fcntl.LOCK_EX)
        try:
            yield
        finally:
            fcntl.flock(fh, fcntl.LOCK_UN)


def cache_key(side: str, level: int, tol: float) -> str:
    text = json.dumps({"family": f"koch-{side}", "j": level, "tol": tol, "version": __version__}, sort_keys=True)
    return hashlib.sha256(text.encode()).hexdigest()[:20]


def solve_map(side: str, level: int, cache_dir=None, tol: float = MAP_TOL) -> PrevertexSolution:
    """Prevertices of T_j / H_j, loaded from the cache when a verified copy exists."""
    gen, _, m = SIDES[side]
    path = None if cache_dir is None else Path(cache_dir) / f"map-{side}{level}-{cache_key(side, level, tol)}.json"
    if path is not None:
        with _locked(path):
            if path.exists():
                try:
                    sol = PrevertexSolution.from_json(path.read_text())
                    res = side_length_residual(sol)
                    if res <= RELOAD_TOL:
                        return sol
                    log.warning("cached map %s fails re-verification (%.2e); recomputing", path.name, res)
                except (ValueError, KeyError) as exc:
                    log.warning("unreadable cache entry %s (%s); recomputing", path.name, exc)
            sol = solve_parameter_problem(gen(level), symmetry=m, tol=tol)
            _atomic_write(path, sol.to_json())
            return sol
    return solve_parameter_problem(gen(level), symmetry=m, tol=tol)


def composite_map(side: str, level: int, cache_dir=None) -> CompositeMap:
    gen, _, _ = SIDES[side]
    g0 = solve_map(side, 0, cache_dir)
    gj = solve_map(side, level, cache_dir)
    return CompositeMap.build(g0, gj, gen(0))


# ---------------------------------------------------------------- results

@dataclass
class SideResult:
    enclosure: Enclosure
    timings: dict
    diagnostics: dict

    def as_dict(self, timings: bool = True) -> dict:
        d = {"enclosure": self.enclosure.as_row(), "diagnostics": self.diagnostics}
        if timings:
            d["timings"] = self.timings
        return d


@dataclass
class LevelResult:
    level: int
    T: SideResult | None = None
    H: SideResult | None = None
    flags: list = field(default_factory=list)

    def side(self, name: str) -> SideResult | None:
        return getattr(self, name)

    @property
    def gap(self) -> float | None:
        """Difference of the midpoints, omega~^2(T_j) - omega~^2(H_j)."""
        if self.T is None or self.H is None:
            return None
        return self.T.enclosure.midpoint - self.H.enclosure.midpoint

    @property
    def consistent(self) -> bool:
        if self.T is None or self.H is None:
            return True
        return self.H.enclosure.sq_lower <= self.T.enclosure.sq_upper

    def as_dict(self, timings: bool = True) -> dict:
        return {
            "level": self.level,
            "T": None if self.T is None else self.T.as_dict(timings),
            "H": None if self.H is None else self.H.as_dict(timings),
            "flags": list(self.flags),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LevelResult":
        def side(x):
            if x is None:
                return None
            return SideResult(Enclosure.from_row(x["enclosure"]), x.get("timings", {}), x.get("diagnostics", {}))

        return cls(d["level"], side(d.get("T")), side(d.get("H")), list(d.get("flags", [])))


def compute_side(side: str, level: int, p: int = 5, refinement: int = 4, b: float | None = None,
                 cache_dir=None) -> SideResult:
    """Enclosure of omega_1^2 on T_j or H_j."""
    if side not in SIDES:
        raise ConfigError(f"side must be 'T' or 'H', got {side!r}")
    gen, mesh_kind, _ = SIDES[side]
    timings = {}
    t = time.perf_counter()
    cmap = composite_map(side, level, cache_dir)
    target = gen(level)
    exps = singularity_exponents(gen(0), target, koch_matching(side, target.n))
    if not assumption_b(exps):
        raise GeometryError(f"assumption alpha - beta < 1 fails on {side}_{level}")
    timings["map"] = time.perf_counter() - t

    t = time.perf_counter()
    mesh = uniform_mesh(mesh_kind, refinement)
    pencil = assemble_pencil(mesh, p, MapWeight(cmap), level=level)
    timings["assemble"] = time.perf_counter() - t

    t = time.perf_counter()
    b = default_b_for(side, level) if b is None else b
    sigma = ground_shift(pencil)
    spectrum = solve_qep(pencil, sigma=sigma, k=4)
    lam = select_ground_point(spectrum, 0.0, b)
    picked = int(np.argmin(np.abs(spectrum.points - lam)))
    if spectrum.flagged[picked]:
        log.warning("%s%d: selected point has residual %.2e", side, level, spectrum.residuals[picked])
    enc = enclosure_from_point(lam, 0.0, b).with_context(level=level, domain=f"{side}{level}", p=p,
                                                        refinement=refinement)
    timings["solve"] = time.perf_counter() - t
    diag = {
        "dimension": pencil.dimension,
        "shift": sigma,
        "map_residual": float(cmap.gj.residual),
        "max_point_residual": float(np.max(spectrum.residuals)),
        "flagged_points": int(np.sum(spectrum.flagged)),
        "singular_cells": pencil.metadata["singular_cells"],
        "quadrature_points": pencil.metadata["weight_points"],
        "solver": spectrum.metadata.get("factorization", spectrum.metadata.get("method")),
    }
    log.info("%s%d p=%d R=%d: [%.10f, %.10f]", side, level, p, refinement, enc.sq_lower, enc.sq_upper)
    return SideResult(enc, timings, diag)


def _job(args):
    side, level, p, refinement, b, cache_dir = args
    return side, level, compute_side(side, level, p, refinement, b, cache_dir)


def check_geometry(config: RunConfig):
    """W1 for the L-system families: Hypothesis G on the requested levels."""
    family = family_by_name(config.family)
    if config.delta is None:
        raise ConfigError(f"{config.family} needs delta")
    return verify_hypothesis_g(family, config.delta, config.levels)


def require_hypothesis(report) -> None:
    if not report.passed:
        cond = sorted(report.failed_conditions())
        raise HypothesisViolation(",".join(cond), "; ".join(report.messages) or "hypothesis G fails")


def run_pipeline(config: RunConfig) -> list[LevelResult]:
    """All requested levels and sides; fractal bounds follow from the sandwich."""
    if config.family in ("quadric", "gosper"):
        require_hypothesis(check_geometry(config))
        raise UnsupportedFamily(
            f"{config.family}: geometry checks pass, but eigenvalue bounds are implemented for the Koch family only")
    jobs = [(side, j, config.fem_order, config.refinement(j), config.b_override, config.cache_dir)
            for j in config.levels for side in config.sides]
    results = {j: LevelResult(j) for j in config.levels}
    # the level-0 maps are shared; solve them once before fanning out
    for side in config.sides:
        solve_map(side, 0, config.cache_dir)

    def record(side, level, res):
        setattr(results[level], side, res)

    if config.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            for side, level, res in pool.map(_job, jobs):
                record(side, level, res)
    else:
        for job in jobs:
            try:
                record(*_job(job))
            except BoundsError as exc:
                exc.args = (f"{job[0]}{job[1]}: {exc}",) + exc.args[1:]
                raise
    out = [results[j] for j in config.levels]
    for r in out:
        if not r.consistent:
            r.flags.append("H lower bound exceeds T upper bound")
    if len(config.sides) == 2:
        h_low = max(r.H.enclosure.sq_lower for r in out)
        t_up = min(r.T.enclosure.sq_upper for r in out)
        if h_low > t_up:
            for r in out:
                r.flags.append("cross-level sandwich violated")
    return out


def fractal_bounds(results: list[LevelResult]) -> tuple[float, float]:
    """Best bounds for the snowflake: max H lower, min T upper."""
    lows = [r.H.enclosure.sq_lower for r in results if r.H is not None]
    ups = [r.T.enclosure.sq_upper for r in results if r.T is not None]
    return (max(lows) if lows else float("nan"), min(ups) if ups else float("nan"))
