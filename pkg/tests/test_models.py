import math

import numpy as np
import pytest

from orbitforge.errors import InvalidInputError
from orbitforge.models import (LorenzParams, appendix_composite, declared_rate, geo_lorenz,
                               linear_normal_form, lorenz_field, lorenz_origin_eigenvalues,
                               normal_form_inf_return_time, preimage_levels)


def test_lorenz_vector_field_value_and_trace():
    fs = lorenz_field()
    assert np.allclose(fs((1.0, 1.0, 1.0)), [0.0, 26.0, -5.0 / 3.0])
    assert np.trace(fs.jac((1.0, 2.0, 3.0))) == pytest.approx(-41.0 / 3.0)


def test_lorenz_analytic_jacobian_matches_finite_differences():
    from orbitforge.flowlab.system import fd_jacobian
    fs = lorenz_field()
    p = np.array([1.3, -2.0, 20.0])
    assert np.allclose(fs.jac(p), fd_jacobian(fs.field, p), atol=1e-5)


def test_lorenz_origin_eigenvalues_closed_form():
    ev = lorenz_origin_eigenvalues()
    assert ev[0] == pytest.approx(-8.0 / 3.0)
    assert ev[1] == pytest.approx((-11.0 - math.sqrt(1201.0)) / 2.0)
    assert ev[2] == pytest.approx((-11.0 + math.sqrt(1201.0)) / 2.0)


def test_lorenz_params_validated():
    with pytest.raises(InvalidInputError):
        LorenzParams(sigma=-1.0)


def test_geo_lorenz_parameter_ranges():
    with pytest.raises(InvalidInputError):
        geo_lorenz(mu=1.2)
    with pytest.raises(InvalidInputError):
        geo_lorenz(rho=0.8)
    assert geo_lorenz().declared_lambda == pytest.approx(declared_rate(1.9, 0.3, 0.35))


def test_appendix_top_slope_and_bottom_identity():
    fm = appendix_composite(mu_t=1.8)
    s = np.linspace(-0.99, 0.99, 10_000)
    s = s[np.abs(s) > 1e-3]
    h = 1e-7
    _, a, _, _ = fm.eval_array(0, s - h)
    _, b, _, _ = fm.eval_array(0, s + h)
    assert np.min(np.abs((b - a) / (2 * h))) >= 1.8 - 1e-6
    pts = np.linspace(-1.0, 0.0, 101)
    tgt, s2, y2, idx = fm.eval_array(1, pts, 0.7 * np.ones_like(pts))
    assert np.all(tgt == 1) and np.array_equal(s2, pts) and np.all(y2 == 0.7)
    assert not fm.in_domain(1, 0.5)


def test_appendix_preimages_grow():
    fm = appendix_composite(mu_t=1.8).restrict([0])
    levels = preimage_levels(fm, 0, 0.0, 8)
    counts = [len(lv) for lv in levels]
    assert all(a < b for a, b in zip(counts, counts[1:]))


def test_normal_form_fixture_rejects_non_lorenz_like_spectrum():
    with pytest.raises(InvalidInputError):
        linear_normal_form(1.0, -0.5, -2.0)


def test_normal_form_inf_return_time_decreases_with_delta():
    fs = linear_normal_form()
    t = [normal_form_inf_return_time(d, fs) for d in (1e-2, 1e-3, 1e-4)]
    l1 = fs.metadata["eigenvalues"][0]
    assert np.allclose(np.diff(t), math.log(10.0) / l1)
