"""Run configuration: a TOML file plus command-line overrides."""

from __future__ import annotations

import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from ..errors import ConfigError
from ..fem.quadrature import MAX_ORDER

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

FAMILIES = ("koch", "koch-T", "koch-H", "quadric", "gosper")


@dataclass
class RunConfig:
    family: str = "koch"
    levels: list = field(default_factory=lambda: [0])
    delta: float | None = None
    fem_order: int = 5
    refinements: dict = field(default_factory=dict)   # level -> refinement count
    default_refinement: int = 4
    b_override: float | None = None
    output_dir: str = "out"
    cache_dir: str | None = ".poincare_cache"
    jobs: int = 1

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.family not in FAMILIES:
            raise ConfigError(f"family must be one of {FAMILIES}, got {self.family!r}")
        try:
            levels = sorted({int(j) for j in self.levels})
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"levels must be integers: {self.levels!r}") from exc
        if not levels or levels[0] < 0:
            raise ConfigError("levels must be a nonempty list of nonnegative integers")
        self.levels = levels
        if not 1 <= int(self.fem_order) <= MAX_ORDER:
            raise ConfigError(f"fem_order must be in 1..{MAX_ORDER}")
        self.fem_order = int(self.fem_order)
        self.refinements = {int(k): int(v) for k, v in self.refinements.items()}
        if int(self.default_refinement) < 1 or any(v < 1 for v in self.refinements.values()):
            raise ConfigError("refinements must be >= 1")
        if self.b_override is not None and not self.b_override > 0:
            raise ConfigError("b must be positive")
        if self.delta is not None and not 0 < float(self.delta) < 1:
            raise ConfigError("delta must lie in (0, 1)")
        if int(self.jobs) < 1:
            raise ConfigError("jobs must be >= 1")

    def refinement(self, level: int) -> int:
        return self.refinements.get(level, self.default_refinement)

    @property
    def sides(self) -> tuple:
        return {"koch": ("T", "H"), "koch-T": ("T",), "koch-H": ("H",)}.get(self.family, ())

    def as_dict(self) -> dict:
        d = asdict(self)
        d["refinements"] = {str(k): v for k, v in self.refinements.items()}
        return d


def parse_refinements(text) -> tuple[int | None, dict]:
    """'4' -> default 4; '0:4,1:5' -> per level; '4,1:5' mixes both."""
    if text is None:
        return None, {}
    if isinstance(text, int):
        return text, {}
    default, per = None, {}
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if ":" in part:
                j, r = part.split(":")
                per[int(j)] = int(r)
            else:
                default = int(part)
        except ValueError as exc:
            raise ConfigError(f"bad refinement spec {part!r}") from exc
    return default, per


def parse_levels(text) -> list:
    """'0,1,2' or '0-4' or a list."""
    if isinstance(text, (list, tuple)):
        return [int(j) for j in text]
    out = []
    try:
        for part in str(text).split(","):
            part = part.strip()
            if "-" in part:
                lo, hi = part.split("-")
                out.extend(range(int(lo), int(hi) + 1))
            elif part:
                out.append(int(part))
    except ValueError as exc:
        raise ConfigError(f"bad level spec {text!r}") from exc
    return out


def load_config(path=None, **overrides) -> RunConfig:
    """Read a TOML file (optional) and apply non-None overrides."""
    data: dict = {}
    if path is not None:
        try:
            with open(Path(path), "rb") as fh:
                data = tomllib.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key, value in overrides.items():
        if value is not None:
            data[key] = value
    if "levels" in data:
        data["levels"] = parse_levels(data["levels"])
    if isinstance(data.get("refinements"), (str, int)):
        default, per = parse_refinements(data["refinements"])
        data["refinements"] = per
        if default is not None:
            data["default_refinement"] = default
    elif "refinements" in data:
        data["refinements"] = {int(k): int(v) for k, v in data["refinements"].items()}
    try:
        return RunConfig(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
