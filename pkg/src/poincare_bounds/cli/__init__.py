"""Configuration, the end-to-end pipeline, reports and the command-line entry point."""

from .config import RunConfig, load_config
from .pipeline import LevelResult, SideResult, compute_side, fractal_bounds, run_pipeline, solve_map
from .report import RateFit, emit_table, rate_fit

__all__ = [
    "LevelResult", "RateFit", "RunConfig", "SideResult", "compute_side", "emit_table", "fractal_bounds",
    "load_config", "rate_fit", "run_pipeline", "solve_map",
]
