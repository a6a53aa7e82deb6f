import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from poincare_bounds.errors import HypothesisViolation, ParameterError, SizeError, UnsupportedFamily
from poincare_bounds.geometry import (
    Polygon,
    contains_points,
    corner_offset_points,
    epsilon0,
    family_by_name,
    general_gap_bound,
    gosper,
    inner_outer_interpolants,
    koch_collar_radius,
    koch_gap_bound,
    koch_inner,
    koch_outer,
    koch_pair,
    lsystem_boundary,
    pang_constant,
    polygon_contains,
    quadric,
    quadrilateral_cover,
    verify_hypothesis_g,
    verify_koch_nesting,
)
from poincare_bounds.geometry.interpolants import cover_overlaps
from poincare_bounds.geometry.polygon import regular_polygon, self_intersections
from poincare_bounds.spectral import disk_constants


def census(poly):
    fr = np.round(poly.angle_fractions * 3).astype(int)
    return {k: int(np.count_nonzero(fr == k)) for k in np.unique(fr)}


# ---------------------------------------------------------------- Koch pairs

@pytest.mark.parametrize("j", range(5))
def test_koch_inner_counts_and_census(j):
    T = koch_inner(j)
    assert T.n == 3 * 4**j
    expected = {1: 3 + (4**j - 1)}
    if j:
        expected[4] = 2 * (4**j - 1)
    assert census(T) == expected
    assert np.allclose(T.edge_lengths, math.sqrt(3) / 3**j, rtol=1e-12)


@pytest.mark.parametrize("j", range(5))
def test_koch_outer_counts_and_census(j):
    H = koch_outer(j)
    assert H.n == 6 * 4**j
    expected = {2: 6 + 4 * (4**j - 1)}
    if j:
        expected[5] = 2 * (4**j - 1)
    assert census(H) == expected


@pytest.mark.parametrize("poly", [koch_inner(2), koch_outer(2), koch_inner(3)])
def test_closure_identity(poly):
    assert np.sum(1 - poly.angle_fractions) == pytest.approx(2.0, abs=1e-12)


def test_level2_side_length():
    assert np.allclose(koch_inner(2).edge_lengths, math.sqrt(3) / 9, rtol=1e-12)


def test_base_polygons():
    T0, H0 = koch_inner(0), koch_outer(0)
    assert np.allclose(np.abs(T0.vertices), 1.0)
    assert T0.area == pytest.approx(3 * math.sqrt(3) / 4, rel=1e-14)
    assert H0.area == pytest.approx(3 * math.sqrt(3) / 2, rel=1e-14)
    assert np.allclose(np.abs(H0.vertices), 1.0)


def test_h1_is_t1_plus_isosceles_triangles():
    # each attached triangle has base l and height l/(2 sqrt 3): area l^2/(4 sqrt 3)
    T1, H1 = koch_inner(1), koch_outer(1)
    ell = math.sqrt(3) / 3
    assert H1.area - T1.area == pytest.approx(12 * ell**2 / (4 * math.sqrt(3)), rel=1e-12)
    assert set(np.round(T1.vertices, 12)) <= set(np.round(H1.vertices, 12))


def test_koch_areas_follow_snowflake_series():
    # |T_j| = |T_0| (1 + 1/3 sum (4/9)^k)
    a0 = koch_inner(0).area
    for j in range(4):
        series = a0 * (1 + sum((4 / 9) ** k for k in range(j)) / 3)
        assert koch_inner(j).area == pytest.approx(series, rel=1e-12)


def test_size_guard():
    with pytest.raises(SizeError):
        koch_inner(13)


@pytest.mark.parametrize("j", [0, 1, 2])
def test_koch_nesting_inclusions(j):
    rep = verify_koch_nesting(koch_pair(j), koch_pair(j + 1))
    assert all(rep.inclusions.values())


def test_koch_collar_radius_is_sharp():
    # the displayed radius 1/3^(j+1) is too small; the sharp radius works
    for j in (0, 1):
        default = verify_koch_nesting(koch_pair(j), koch_pair(j + 1))
        assert not default.collar_ok
        assert default.collar_depth <= koch_collar_radius(j) * (1 + 1e-9)
        assert default.collar_depth > 0.95 * koch_collar_radius(j)
        sharp = verify_koch_nesting(koch_pair(j), koch_pair(j + 1), collar_eps=koch_collar_radius(j))
        assert sharp.collar_ok


def test_perturbed_t1_breaks_inclusion():
    pair = koch_pair(1)
    T1 = pair.inner
    k = int(np.argmax(np.abs(T1.vertices)))
    moved = T1.translated_vertex(k, 0.2 * T1.vertices[k] / abs(T1.vertices[k]))
    assert not polygon_contains(pair.outer, moved)


def test_polygon_json_round_trip():
    T = koch_inner(2)
    data = json.loads(T.to_json())
    assert set(data) >= {"vertices", "angle_fractions", "level", "side_length"}
    back = Polygon.from_json(T.to_json())
    assert np.array_equal(back.vertices, T.vertices)


# ---------------------------------------------------------------- L-systems

def test_quadric_levels():
    fam = quadric()
    S0 = lsystem_boundary(fam, 0)
    assert S0.area == pytest.approx(1.0)
    S1 = lsystem_boundary(fam, 1)
    assert np.allclose(S1.edge_lengths, 0.25, rtol=1e-12)
    assert S1.max_angle == pytest.approx(1.5 * math.pi)
    # generator is area preserving
    assert lsystem_boundary(fam, 2).area == pytest.approx(1.0, rel=1e-12)


def test_gosper_side_length():
    S2 = lsystem_boundary(gosper(), 2)
    assert np.allclose(S2.edge_lengths, 1 / 5, rtol=1e-12)
    assert not self_intersections(S2)


@pytest.mark.parametrize("name", ["quadric", "gosper", "koch"])
def test_family_names(name):
    assert family_by_name(name).name == name


# ---------------------------------------------------------------- offsets

def unit_square():
    return Polygon.from_vertices([0, 1, 1 + 1j, 1j], side_length=1.0)


def test_square_corner_offset():
    S = unit_square()
    inner, outer = corner_offset_points(S, 0, 0.1)
    assert abs(inner - S.vertices[0]) == pytest.approx(0.1 * math.sqrt(2), rel=1e-14)
    assert (inner + outer) / 2 == pytest.approx(S.vertices[0], abs=1e-15)
    assert contains_points(S, [inner])[0] and not contains_points(S, [outer])[0]


def test_straight_vertex_offset():
    S = Polygon.from_vertices([0, 0.5, 1, 1 + 1j, 1j])
    inner, _ = corner_offset_points(S, 1, 0.1)
    assert abs(inner - 0.5) == pytest.approx(0.1, rel=1e-14)


def test_reflex_offset_inside():
    S1 = lsystem_boundary(quadric(), 1)
    k = int(np.argmax(S1.angle_fractions))
    assert S1.angle_fractions[k] == pytest.approx(1.5)
    inner, outer = corner_offset_points(S1, k, 0.05)
    assert contains_points(S1, [inner])[0]
    assert not contains_points(S1, [outer])[0]


def test_offset_outside_range():
    S = unit_square()
    with pytest.raises(ParameterError):
        corner_offset_points(S, 0, epsilon0(S) * 1.01)


def test_square_cover_congruent_and_disjoint():
    quads = quadrilateral_cover(unit_square(), 0.1)
    assert quads.shape == (4, 4)
    shapes = [np.sort(np.abs(q - q.mean())) for q in quads]
    assert all(np.allclose(s, shapes[0]) for s in shapes)
    assert cover_overlaps(quads, 1.0) == []


def test_t1_cover_disjoint():
    T1 = koch_inner(1)
    quads = quadrilateral_cover(T1, 0.01)
    assert len(quads) == 12
    assert cover_overlaps(quads, T1.diameter) == []


def test_quadric_interpolants():
    S1 = lsystem_boundary(quadric(), 1)
    pair = inner_outer_interpolants(S1, 0.4)
    assert polygon_contains(S1, pair.inner)
    assert polygon_contains(pair.outer, S1)
    with pytest.raises(HypothesisViolation) as info:
        inner_outer_interpolants(S1, 0.6)
    assert info.value.condition == "G1"


def test_small_delta_inner_area():
    areas = [inner_outer_interpolants(unit_square(), d).inner.area for d in (1e-2, 1e-4)]
    assert abs(areas[1] - 1) < abs(areas[0] - 1) < 0.05


# ---------------------------------------------------------------- hypothesis G

def test_quadric_ranges():
    assert verify_hypothesis_g(quadric(), 0.4, [1, 2, 3]).passed
    rep = verify_hypothesis_g(quadric(), 0.3, [1, 2])
    assert "G3" in rep.failed_conditions()


def test_gosper_ranges():
    assert verify_hypothesis_g(gosper(), 0.48, [2, 4]).passed
    assert not verify_hypothesis_g(gosper(), 0.25, [2, 4]).passed


def test_cesaro_unsupported():
    with pytest.raises(UnsupportedFamily):
        verify_hypothesis_g(family_by_name("cesaro"), 0.3, [1])


# ---------------------------------------------------------------- gap bounds

def test_pang_constant_examples():
    j01 = disk_constants().j01_sq
    assert pang_constant(math.pi, 1.0) == pytest.approx(2**9 * j01**4 / 3, rel=1e-13)
    S = 1.5 * math.sqrt(3)
    assert pang_constant(S, 1.0) == pytest.approx(2**9 * j01**4 * S**2.25 / (3 * math.pi**2.25), rel=1e-13)
    assert pang_constant(S, 2.0) == pytest.approx(pang_constant(S, 1.0) / 2**7, rel=1e-13)
    with pytest.raises(ParameterError):
        pang_constant(-1, 1)


def test_koch_gap_bound_values():
    j01 = disk_constants().j01_sq
    b0 = koch_gap_bound(0).bound
    assert b0 == pytest.approx(j01**4 * 3**0.75 / (2**1.25 * math.pi**2.25), rel=1e-14)
    assert koch_gap_bound(4).bound > 0.0986


@given(st.integers(0, 30))
def test_koch_gap_bound_rate(j):
    assert koch_gap_bound(j + 2).bound == pytest.approx(koch_gap_bound(j).bound / 3, rel=1e-14)
    assert koch_gap_bound(j + 1).bound < koch_gap_bound(j).bound


@given(st.floats(1e-6, 10), st.floats(0.01, 0.49), st.floats(3.2, 6.2), st.floats(1e-6, 1))
def test_general_gap_bound_scaling(C, delta, beta0, ell):
    full = general_gap_bound(C, delta, beta0, ell).bound
    assert general_gap_bound(C, delta, beta0, ell / 4).bound == pytest.approx(full / 2, rel=1e-12)


def test_general_gap_bound_domain():
    with pytest.raises(ParameterError):
        general_gap_bound(1.0, 0.4, 3.0, 1.0)


def test_quadric_rate_half():
    fam = quadric()
    b = [general_gap_bound(1.0, 0.4, 1.5 * math.pi, fam.side_length(j)).bound for j in range(4)]
    assert np.allclose(np.array(b[1:]) / b[:-1], 0.5)


# ---------------------------------------------------------------- properties

@given(st.integers(3, 12), st.floats(0, 2 * math.pi))
def test_regular_polygon_closure(m, phase):
    P = Polygon.from_vertices(regular_polygon(m, 1.0, phase))
    assert np.sum(1 - P.angle_fractions) == pytest.approx(2.0, abs=1e-12)
    assert P.area == pytest.approx(0.5 * m * math.sin(2 * math.pi / m), rel=1e-12)


@given(st.floats(0.01, 0.45))
def test_square_cover_disjoint_in_range(eps):
    S = unit_square()
    quads = quadrilateral_cover(S, eps)
    assert cover_overlaps(quads, 1.0) == []
