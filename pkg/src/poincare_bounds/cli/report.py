"""Tables, rate fits and plots of the level results."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import BoundsError, ConfigError
from .pipeline import LevelResult, _atomic_write

CSV_COLUMNS = ("j", "refinement", "lower", "upper")


@dataclass(frozen=True)
class RateFit:
    C: float
    rho: float
    residual: float
    levels: tuple

    def as_dict(self) -> dict:
        return {"C": self.C, "rho": self.rho, "residual": self.residual, "levels": list(self.levels)}


def gaps(results) -> tuple[np.ndarray, np.ndarray]:
    """(j, r(j)) with r(j) the difference of the T and H midpoints."""
    js, rs = [], []
    for r in results:
        if r.gap is not None:
            js.append(r.level)
            rs.append(r.gap)
    return np.array(js, dtype=float), np.array(rs, dtype=float)


def rate_fit(results=None, *, levels=None, values=None) -> RateFit:
    """Least-squares fit log r(j) = log C + j log rho.

    Pass level results, or explicit `levels` and `values` of r(j).
    """
    if results is not None:
        js, rs = gaps(results)
    else:
        js = np.asarray(levels, dtype=float)
        rs = np.asarray(values, dtype=float)
    if len(js) < 3:
        raise ConfigError("rate fit needs at least three levels with both T and H enclosures")
    if np.any(rs <= 0):
        raise BoundsError("nonpositive gap r(j); the fit is undefined")
    A = np.column_stack([np.ones_like(js), js])
    coef, *_ = np.linalg.lstsq(A, np.log(rs), rcond=None)
    resid = float(np.linalg.norm(A @ coef - np.log(rs)))
    return RateFit(float(np.exp(coef[0])), float(np.exp(coef[1])), resid, tuple(int(j) for j in js))


def _csv_text(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in rows:
        w.writerow([repr(x) if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def results_json(results) -> str:
    """Enclosures and diagnostics; wall-clock timings go to a separate file so
    identical runs give identical bytes."""
    return json.dumps([r.as_dict(timings=False) for r in results], indent=1)


def timings_json(results) -> str:
    return json.dumps({str(r.level): {side: r.side(side).timings for side in ("T", "H") if r.side(side)}
                       for r in results}, indent=1)


def load_results(path) -> list[LevelResult]:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read results {path}: {exc}") from exc
    return [LevelResult.from_dict(d) for d in data]


def emit_table(results, out_dir, plot: bool = True) -> list[Path]:
    """CSV per side, the JSON results and timings, and (with >= 2 gaps) an SVG semilog plot of r(j)."""
    results = list(results)
    if not results:
        raise ConfigError("no results to tabulate")
    out = Path(out_dir)
    written = []
    for side in ("T", "H"):
        rows = []
        for r in results:
            s = r.side(side)
            if s is not None:
                e = s.enclosure
                rows.append((r.level, e.refinement, e.sq_lower, e.sq_upper))
        if rows:
            path = out / f"bounds_{side}.csv"
            _atomic_write(path, _csv_text(rows))
            written.append(path)
    for name, text in (("results.json", results_json(results)), ("timings.json", timings_json(results))):
        path = out / name
        _atomic_write(path, text)
        written.append(path)
    js, rs = gaps(results)
    if plot and len(js) >= 2 and np.all(rs > 0):
        path = out / "gap_semilog.svg"
        plot_gaps(js, rs, path)
        written.append(path)
    return written


def plot_gaps(js, rs, path, fit: RateFit | None = None) -> Path:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.semilogy(js, rs, "o-", label="r(j)")
    if fit is None and len(js) >= 3:
        fit = rate_fit(levels=js, values=rs)
    if fit is not None:
        jj = np.linspace(min(js), max(js), 50)
        ax.semilogy(jj, fit.C * fit.rho ** jj, "--", label=f"{fit.C:.3g} * {fit.rho:.4f}^j")
    ax.set_xlabel("level j")
    ax.set_ylabel("midpoint gap r(j)")
    ax.legend()
    fig.tight_layout()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    # drop the date and fix the id salt so identical data gives identical files
    with matplotlib.rc_context({"svg.hashsalt": "poincare-bounds"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path
