import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from orbitforge.errors import InvalidInputError
from orbitforge.geometry import (Band, ConeField, Curve, Leaf, SquareComplex, curve_covers_band,
                                 curve_tangent_in_cone, inclination, interval_covers)


def test_leaf_kinds():
    assert Leaf(0, -1.0).kind == "-"
    assert Leaf(0, 0.0).kind == "0"
    assert Leaf(0, 1.0).kind == "+"
    assert Leaf(0, 0.3).kind == ""
    assert Leaf(0, 1.0).is_boundary and not Leaf(0, 0.0).is_boundary


def test_leaf_outside_square_rejected():
    with pytest.raises(InvalidInputError):
        Leaf(0, 1.5)


def test_square_complex_component_check():
    cx = SquareComplex(2)
    cx.check_component(1)
    with pytest.raises(InvalidInputError):
        cx.check_component(2)
    with pytest.raises(InvalidInputError):
        SquareComplex(0)


def test_band_json_round_trip():
    b = Band(1, -0.25, 0.5, open=False)
    assert Band.from_json(b.to_json()) == b
    with pytest.raises(InvalidInputError):
        Band(0, 0.5, 0.5)


def test_segment_slope_half_is_inside_cone():
    # atan(1/2) ~ 0.4636 < 0.5
    c = Curve.segment(0, (-0.5, 0.0), (0.5, 0.5))
    assert curve_tangent_in_cone(c, ConeField(0.5))
    assert not curve_tangent_in_cone(c, ConeField(0.45))


def test_horizontal_segment_covers_closed_band():
    c = Curve.horizontal(0, 0.0, 1.0, 0.0)
    assert curve_covers_band(c, Band(0, 0.1, 0.9, open=False))
    assert curve_covers_band(c, Band(0, 0.1, 0.9))
    assert not curve_covers_band(c, Band(0, -0.1, 0.9))
    assert not curve_covers_band(c, Band(1, 0.1, 0.9))


def test_open_curve_end_does_not_cover_closed_band_end():
    assert not interval_covers(0.1, False, 0.9, True, Band(0, 0.1, 0.9, open=False))
    assert interval_covers(0.1, True, 0.9, True, Band(0, 0.1, 0.9, open=False))
    assert interval_covers(0.1, False, 0.9, False, Band(0, 0.1, 0.9))


def test_degenerate_curve_rejected():
    with pytest.raises(InvalidInputError):
        Curve.segment(0, (0.2, 0.2), (0.2, 0.2))
    with pytest.raises(InvalidInputError):
        Curve.from_points(0, [[0.1, 0.1], [0.1, 0.1]])


def test_inclination_zero_vector():
    with pytest.raises(InvalidInputError):
        inclination((0.0, 0.0))


def test_resample_keeps_endpoints():
    c = Curve.graph(0, np.sin, np.cos, -1.0, 1.0, n=50).resample(200)
    assert len(c) == 200
    assert np.allclose(c.points[0], [-1.0, math.sin(-1.0)])
    assert np.allclose(c.points[-1], [1.0, math.sin(1.0)])


@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(0.01, 1.5))
def test_inclination_matches_cone_membership(vx, vy, alpha):
    if vx == 0 and vy == 0:
        return
    cone = ConeField(min(alpha, 1.5))
    ang = inclination((vx, vy))
    assert 0.0 <= ang <= math.pi / 2
    assert cone.contains((vx, vy)) == (ang <= cone.alpha + 1e-12)


@given(st.floats(-1, 0.9), st.floats(0.01, 1.0))
def test_covering_interval_is_monotone_in_band(lo, w):
    hi = min(1.0, lo + w)
    band = Band(0, lo, hi)
    inner = Band(0, lo + (hi - lo) / 4, hi - (hi - lo) / 4)
    c = Curve.horizontal(0, lo, hi, 0.0)
    assert curve_covers_band(c, band)
    assert curve_covers_band(c, inner)
