import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from orbitforge.errors import DomainError, InvalidInputError
from orbitforge.geometry import ConeField, Leaf, SquareComplex
from orbitforge.models import appendix_composite, geo_lorenz, identity_map, tent_map
from orbitforge.trimap import (Branch, TriangularMap, compute_n_of_L, eval_leaf, one_sided_limit,
                               regularity_probe, verify_lambda_hyperbolic)


def _affine(component, lo, hi, a, c, target=None):
    return Branch(component, lo, hi, leaf=lambda s: a * s + c, vertical=lambda s, y: 0.5 * y,
                  target=target, dleaf=lambda s: a, dvertical=lambda s, y: (0.0, 0.5))


def test_eval_leaf_geo_lorenz():
    fm = geo_lorenz(mu=1.9)
    assert eval_leaf(fm, Leaf(0, 0.5)).s == pytest.approx(1.9 * 0.5 - 1)
    assert eval_leaf(fm, Leaf(0, -0.5)).s == pytest.approx(-1.9 * 0.5 + 1)


def test_eval_outside_domain_raises():
    fm = geo_lorenz()
    with pytest.raises(DomainError):
        fm.eval((0, 0.0, 0.2))
    with pytest.raises(DomainError):
        eval_leaf(fm, Leaf(0, 0.0))


def test_large_domain_flag():
    assert geo_lorenz().large_domain
    assert not identity_map().large_domain


def test_discontinuities_are_actual_jumps():
    assert geo_lorenz().discontinuities(0) == [0.0]
    assert tent_map().discontinuities(0) == []


def test_n_of_L_interior_image():
    it = compute_n_of_L(geo_lorenz(), Leaf(0, 0.5))
    assert it.n == 0 and not it.exceeded


def test_n_of_L_one_boundary_step():
    # square 0 sends L_- to L_- of square 1, which then maps inside
    cx = SquareComplex(2)
    br = [_affine(0, -1.0, 1.0, 1.0, 0.0, target=1), _affine(1, -1.0, 1.0, 0.5, 0.0, target=0)]
    fm = TriangularMap(cx, br, ConeField(0.3), 1.0)
    it = compute_n_of_L(fm, Leaf(0, -1.0))
    assert it.n == 1
    assert [(L.component, L.s) for L in it.visited] == [(0, -1.0), (1, -1.0)]


def test_n_of_L_fixed_boundary_exceeds_cap():
    it = compute_n_of_L(tent_map(), Leaf(0, -1.0))
    assert it.exceeded and it.n is None
    with pytest.raises(InvalidInputError):
        compute_n_of_L(tent_map(), Leaf(0, -1.0), cap=1)


def test_one_sided_limits_at_the_cut():
    fm = geo_lorenz(mu=1.9)
    left = one_sided_limit(fm, Leaf(0, 0.0), -1)
    right = one_sided_limit(fm, Leaf(0, 0.0), +1)
    assert left.s == pytest.approx(1.0, abs=1e-9)
    assert right.s == pytest.approx(-1.0, abs=1e-9)


def test_one_sided_limit_missing_side_is_none():
    fm = appendix_composite().restrict([1])
    assert one_sided_limit(fm, Leaf(0, 0.0), +1) is None
    assert one_sided_limit(fm, Leaf(0, 0.0), -1).s == pytest.approx(0.0, abs=1e-9)


def test_verify_geo_lorenz_passes_with_cone_04():
    rep = verify_lambda_hyperbolic(geo_lorenz(alpha=0.4), samples=2000)
    assert rep.verdict == "pass"
    assert rep.cone_invariance_fraction == 1.0
    assert rep.min_expansion >= rep.declared_lambda


def test_verify_identity_fails():
    rep = verify_lambda_hyperbolic(identity_map(), samples=500, lam=1.0)
    assert rep.verdict == "fail"
    assert rep.cone_invariance_fraction == 0.0


def test_verify_appendix_components():
    fm = appendix_composite()
    assert verify_lambda_hyperbolic(fm, samples=1000, lam=1.2, components=[0]).verdict == "pass"
    assert verify_lambda_hyperbolic(fm, samples=1000, lam=1.1, components=[1]).verdict == "fail"


def test_finite_difference_jacobian_matches_analytic():
    fm = geo_lorenz()
    for p in [(0, -0.4, 0.2), (0, 0.7, -0.6)]:
        assert np.allclose(fm.jacobian(p, analytic=False), fm.jacobian(p), atol=1e-6)
    rep = verify_lambda_hyperbolic(fm, samples=300, analytic=False)
    assert rep.derivative == "finite-difference"
    assert rep.verdict == "pass"


@settings(max_examples=60, deadline=None)
@given(st.floats(-0.99, 0.99).filter(lambda s: abs(s) > 1e-6),
       st.floats(-1, 1), st.floats(-1, 1))
def test_leaf_image_independent_of_height(s, y1, y2):
    fm = geo_lorenz()
    c1, s1, _ = fm.eval((0, s, y1))
    c2, s2, _ = fm.eval((0, s, y2))
    assert c1 == c2 and s1 == s2


def test_restrict_keeps_only_closed_components():
    fm = appendix_composite()
    top = fm.restrict([0])
    assert top.k == 1 and len(top.branches) == 2
    with pytest.raises(InvalidInputError):
        fm.restrict([])


def test_regularity_probe_geo_lorenz():
    rep = regularity_probe(geo_lorenz(), samples=101)
    assert rep["h1_violations"] == []
