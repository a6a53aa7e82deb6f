import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from poincare_bounds.conformal import (
    CompositeMap,
    InverseMap,
    PrevertexSolution,
    assumption_b,
    composite_derivative_abs,
    inverse_disk_map,
    koch_matching,
    regular_forward,
    sc_evaluate,
    side_length_residual,
    singularity_exponents,
    solve_parameter_problem,
    transplanted_singularity_table,
)
from poincare_bounds.conformal.quadrature import gauss_jacobi
from poincare_bounds.errors import GeometryError, ParameterError
from poincare_bounds.fem import MapWeight, uniform_mesh, weight_integral
from poincare_bounds.geometry import contains_points, koch_inner, koch_outer
from poincare_bounds.geometry.polygon import Polygon

from conftest import corner_slopes


@pytest.fixture(scope="module")
def t0_map():
    return solve_parameter_problem(koch_inner(0), symmetry=3)


@pytest.fixture(scope="module")
def t1_map():
    return solve_parameter_problem(koch_inner(1), symmetry=3)


# ---------------------------------------------------------------- quadrature

@pytest.mark.parametrize("a,b", [(0.0, 0.0), (-2 / 3, 0.0), (1 / 3, -2 / 3), (-0.5, -0.5)])
def test_gauss_jacobi_moments(a, b):
    # int_{-1}^{1} (1-x)^a (1+x)^b x^k exactly: expand x = (1+x) - 1 into Beta integrals
    import mpmath

    def moment(k):
        with mpmath.workdps(40):
            A, B = mpmath.mpf(a), mpmath.mpf(b)
            return float(sum(
                mpmath.binomial(k, i) * (-1) ** (k - i) * mpmath.mpf(2) ** (A + B + i + 1) * mpmath.beta(A + 1, B + i + 1)
                for i in range(k + 1)))

    x, w = gauss_jacobi(24, a, b)
    for k in (0, 3, 10):
        exact = moment(k)
        assert np.dot(w, x**k) == pytest.approx(exact, rel=1e-12, abs=1e-14)


# ---------------------------------------------------------------- parameter problem

def test_t0_map(t0_map):
    assert t0_map.n == 3
    assert side_length_residual(t0_map) < 1e-10
    assert np.allclose(np.abs(t0_map.prevertices), 1, atol=1e-14)


def test_t1_map(t1_map):
    assert t1_map.n == 12
    assert t1_map.sector_size - 1 == 3      # free prevertices per sector; 9 in total
    assert side_length_residual(t1_map) < 1e-10


@pytest.mark.parametrize("sol_name", ["t0_map", "t1_map"])
def test_closure_sum(sol_name, request):
    sol = request.getfixturevalue(sol_name)
    assert np.sum(sol.exponents) == pytest.approx(-2.0, abs=1e-12)


def test_prevertices_ordered(t1_map):
    arg = np.unwrap(np.angle(t1_map.prevertices))
    assert np.all(np.diff(arg) > 0)


def test_t1_prevertex_symmetry(t1_map):
    xi = t1_map.prevertices
    rot = xi * np.exp(2j * np.pi / 3)
    assert np.max(np.min(np.abs(rot[:, None] - xi[None, :]), axis=1)) < 1e-10


def test_h2_map_symmetry(composite):
    gj = composite("H", 2).gj
    assert gj.n == 96
    xi = gj.prevertices
    rot = xi * np.exp(1j * np.pi / 3)
    assert np.max(np.min(np.abs(rot[:, None] - xi[None, :]), axis=1)) < 1e-10
    assert side_length_residual(gj) < 1e-10


def test_vertex_images(t1_map):
    w = sc_evaluate(t1_map, t1_map.prevertices, anchor="center")
    assert np.max(np.abs(w - t1_map.vertices)) < 1e-9 * koch_inner(1).diameter


def test_h0_centre_maps_to_zero():
    sol = solve_parameter_problem(koch_outer(0), symmetry=6)
    assert abs(sc_evaluate(sol, 0.0)) < 1e-13


def test_path_independence(t0_map):
    a = sc_evaluate(t0_map, 0.5, anchor="center")
    b = sc_evaluate(t0_map, 0.5, anchor="vertex")
    assert abs(a - b) < 1e-10
    assert contains_points(koch_inner(0), [a])[0]


def test_regular_closed_form_agrees(t0_map):
    xi = np.array([0.3, 0.5j, -0.7 + 0.2j, 0.9 * np.exp(0.4j)])
    assert np.max(np.abs(regular_forward(t0_map, xi) - sc_evaluate(t0_map, xi))) < 1e-12


def test_serialization_round_trip(t1_map):
    data = json.loads(t1_map.to_json())
    assert set(data) >= {"prevertices", "exponents", "C", "A", "residual"}
    back = PrevertexSolution.from_json(t1_map.to_json())
    assert np.max(np.abs(back.prevertices - t1_map.prevertices)) < 1e-15
    assert side_length_residual(back) < 1e-10


def test_outside_disk_rejected(t0_map):
    with pytest.raises(ParameterError):
        sc_evaluate(t0_map, 1.1)


# ---------------------------------------------------------------- inverse and composite

def test_inverse_vertices_and_centre(t1_map):
    inv = InverseMap.build(t1_map)
    assert np.allclose(inv(t1_map.vertices), t1_map.prevertices, atol=1e-14)
    assert abs(inv(np.array([0j]))[0]) < 1e-12


@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_inverse_round_trip(u, v):
    sol = _T0_MAP
    # random point of T0 from barycentric coordinates, pulled slightly inside
    a, b = min(u, v), max(u, v)
    w = sol.vertices
    z = 0.98 * (a * w[0] + (b - a) * w[1] + (1 - b) * w[2])
    xi = _T0_INVERSE(np.array([z]))
    assert abs(sc_evaluate(sol, xi[0]) - z) < 1e-10


_T0_MAP = solve_parameter_problem(koch_inner(0), symmetry=3)
_T0_INVERSE = InverseMap.build(_T0_MAP)


def test_inverse_disk_map_function(t1_map):
    z = np.array([0.1 + 0.2j, -0.3j])
    xi = inverse_disk_map(t1_map, z)
    assert np.max(np.abs(sc_evaluate(t1_map, xi) - z)) < 1e-10


@pytest.mark.parametrize("side", ["T", "H"])
def test_level0_identity(side, composite):
    cmap = composite(side, 0)
    base = cmap.base
    rng = np.random.default_rng(1)
    w = base.vertices
    bary = rng.dirichlet(np.ones(3), size=200)
    z = 0.95 * (bary @ w[[0, len(w) // 3, 2 * len(w) // 3]])
    assert np.max(np.abs(composite_derivative_abs(cmap, z) - 1)) < 1e-12


@pytest.mark.parametrize("side,j", [("T", 1), ("T", 2), ("H", 1), ("H", 2)])
def test_fixed_vertices(side, j, composite):
    z, fz = composite(side, j).fixed_points()
    assert np.max(np.abs(fz - z)) < 1e-8


def test_derivative_positive_inside(composite):
    cmap = composite("T", 1)
    z = np.array([0j, 0.2 + 0.1j, -0.3 - 0.2j])
    d = cmap.abs_derivative(z)
    assert np.all(np.isfinite(d)) and np.all(d > 0)


def test_derivative_rejects_outside(composite):
    with pytest.raises(GeometryError):
        composite("T", 1).abs_derivative(np.array([2.0 + 0j]))


@pytest.mark.parametrize("side,j", [("T", 1), ("T", 2), ("H", 1), ("H", 2)])
def test_area_identity(side, j, composite):
    cmap = composite(side, j)
    target = (koch_inner if side == "T" else koch_outer)(j)
    mesh = uniform_mesh("triangle" if side == "T" else "hexagon", 2)
    area = weight_integral(mesh, MapWeight(cmap), power=2.0)
    assert area == pytest.approx(target.area, rel=1e-6)


@pytest.mark.parametrize("side,j", [("T", 1), ("H", 1), ("T", 2)])
def test_corner_slopes(side, j, composite):
    for slope, beta in corner_slopes(composite(side, j)):
        assert abs(slope - beta) < 0.01


# ---------------------------------------------------------------- exponents

def test_koch_t_exponents():
    T0, T1 = koch_inner(0), koch_inner(1)
    exps = singularity_exponents(T0, T1, koch_matching("T", T1.n))
    fixed = [e for e in exps if e.vertex_index in koch_matching("T", T1.n)]
    assert all(e.map_exponent == pytest.approx(1.0) for e in fixed)
    tips = [e for e in exps if e.vertex_index not in koch_matching("T", T1.n) and e.alpha < 1]
    assert tips and all(e.map_exponent == pytest.approx(1 / 3) for e in tips)
    assert assumption_b(exps)


def test_assumption_b_violation():
    sq = Polygon.from_vertices([0, 1, 1 + 1j, 1j])
    exps = singularity_exponents(sq, sq, {})
    # a right angle matched against a straight base boundary is fine
    assert assumption_b(exps)
    bad = [e for e in exps]
    from poincare_bounds.conformal import SingularityExponent

    bad.append(SingularityExponent(9, 2.0, 1.0))
    assert not assumption_b(bad)


def test_singularity_table():
    T = {(r.vertices, float(r.alpha)): float(r.leading_power) for r in transplanted_singularity_table("T")}
    H = {(r.vertices, float(r.alpha)): float(r.leading_power) for r in transplanted_singularity_table("H")}
    assert T[("k<=3", 1 / 3)] == 3
    assert T[("k>3", 4 / 3)] == 1
    assert H[("k<=6", 2 / 3)] == 1.5
    with pytest.raises(ParameterError):
        transplanted_singularity_table("Q")
