import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("ci", deadline=None, max_examples=200, derandomize=True)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# per-level refinements used whenever the Koch enclosures are needed
KOCH_REFINEMENTS = {("T", 0): 3, ("H", 0): 4, 1: 5, 2: 4, 3: 4, 4: 3}

_criteria = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_criteria] = []
    config.addinivalue_line("markers", "slow: long-running numerical checks")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_criteria, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for number, line in sorted(lines):
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def record_criterion(request):
    """Record 'criterion N: PASS|FAIL detail' for the terminal summary."""
    store = request.config.stash[_criteria]

    def record(number: int, passed: bool, detail: str) -> bool:
        line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
        store.append((number, line))
        print(line)
        return passed

    return record


@pytest.fixture(scope="session")
def map_cache(tmp_path_factory):
    return tmp_path_factory.mktemp("map-cache")


@pytest.fixture(scope="session")
def composite(map_cache):
    from poincare_bounds.cli.pipeline import composite_map

    memo = {}

    def get(side: str, level: int):
        if (side, level) not in memo:
            memo[side, level] = composite_map(side, level, map_cache)
        return memo[side, level]

    return get


@pytest.fixture(scope="session")
def koch_side(map_cache):
    """Memoized SideResult for (side, level) at p=5 and the standard refinements."""
    import time

    from poincare_bounds.cli.pipeline import compute_side

    memo = {}

    def get(side: str, level: int):
        if (side, level) not in memo:
            R = KOCH_REFINEMENTS.get((side, level), KOCH_REFINEMENTS.get(level))
            t = time.perf_counter()
            res = compute_side(side, level, p=5, refinement=R, cache_dir=map_cache)
            res.timings["wall"] = time.perf_counter() - t
            memo[side, level] = res
        return memo[side, level]

    return get


def corner_slopes(cmap, count=None):
    """Radial log-log slopes of |f'| at the singular boundary points."""
    zs, betas = cmap.singular_points()
    base = cmap.base
    rho = np.geomspace(1e-7, 1e-5, 5)
    out = []
    for zk, beta in list(zip(zs, betas))[:count]:
        # inward normal of the base edge through zk
        a, b = base.edges
        k = int(np.argmin(np.abs(np.abs(zk - a) + np.abs(zk - b) - np.abs(b - a))))
        normal = 1j * (b[k] - a[k]) / abs(b[k] - a[k])
        d = cmap.abs_derivative(zk + rho * normal)
        slope = np.polyfit(np.log(rho), np.log(d), 1)[0]
        out.append((slope, beta))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
