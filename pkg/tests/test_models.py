import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shrinker_spectra.errors import DomainError, ExpressionError, ParameterError, TabulationMiss
from shrinker_spectra.grid import line_grid, model_grid
from shrinker_spectra.models import (affine, constant, eval_geometry, eval_potential, expression, harmonic,
                                     make_cylinder, make_gaussian, make_model, make_sphere, polynomial,
                                     potential_samples, shift, tabulated)

LN2_M1 = math.log(2.0) - 1.0


def test_gaussian_examples():
    g = make_gaussian(1, 0.25)
    f, _, _, _ = eval_geometry(g, [1.7])
    assert f == pytest.approx(1.7**2, rel=1e-15)
    assert g.mu_s == 0.0
    g2 = make_gaussian(2, 1.0)
    assert eval_geometry(g2, [0.0, 0.0])[0] == 0.0
    assert eval_geometry(g2, [3.0, -1.0])[3] == 0.0
    f, gf, _, R = eval_geometry(make_gaussian(1, 1.0), [3.0])
    assert 1.0 * (R + gf) - f == pytest.approx(0.0, abs=1e-15)


def test_sphere_examples():
    s = make_sphere(2, 0.5)
    assert s.radius == pytest.approx(1.0)
    assert s.scalar_curvature == pytest.approx(2.0)
    assert math.exp(s.log_volume) == pytest.approx(4 * math.pi, rel=1e-15)
    assert abs(s.mu_s - LN2_M1) <= 1e-15
    assert make_sphere(3, 0.25).scalar_curvature == pytest.approx(6.0)


def test_cylinder_examples():
    for tau in (0.1, 0.5, 3.0):
        assert abs(make_cylinder(2, 1, tau).mu_s - LN2_M1) <= 1e-15
    c = make_cylinder(2, 1, 0.5)
    assert c.radius == pytest.approx(1.0) and c.scalar_curvature == pytest.approx(2.0)
    g = c.sample(model_grid(c, 3.0, 13, 1))
    assert np.allclose(g["laplacian_f"] + g["R"], 3.0, atol=1e-14, rtol=0)


def test_eval_geometry_examples():
    assert eval_geometry(make_gaussian(1, 0.25), [2.0]) == pytest.approx((4.0, 16.0, 2.0, 0.0))
    s = make_sphere(2, 0.5)
    assert eval_geometry(s, [0.0, 0.6, 0.8]) == pytest.approx((s.f_offset, 0.0, 0.0, 2.0))
    c = make_cylinder(2, 1, 0.5)
    assert eval_geometry(c, ([0.0, 0.0, 1.0], [1.0])) == pytest.approx((0.5 + c.f_offset, 1.0, 1.0, 2.0))


def test_eval_geometry_domain_errors():
    with pytest.raises(DomainError):
        eval_geometry(make_sphere(2, 0.5), [1.0, 1.0, 0.0])
    with pytest.raises(DomainError):
        eval_geometry(make_gaussian(2, 1.0), [1.0])


@pytest.mark.parametrize("call", [
    lambda: make_gaussian(0, 1.0), lambda: make_gaussian(1, 0.0), lambda: make_gaussian(1, -1.0),
    lambda: make_sphere(1, 1.0), lambda: make_cylinder(1, 1, 1.0), lambda: make_cylinder(2, 0, 1.0),
    lambda: make_model("torus", tau=1.0), lambda: make_gaussian(1, float("nan")),
])
def test_invalid_parameters(call):
    with pytest.raises(ParameterError):
        call()


def test_potential_examples():
    tau = 0.25
    assert eval_potential(harmonic(stiffness=1.0 / (16 * tau * tau)), [1.0]) == pytest.approx(1.0)
    assert eval_potential(constant(3.0), [12.5]) == 3.0
    assert eval_potential(affine([2.0], 0.0), [-1.0]) == -2.0


def test_confinement_flags():
    assert harmonic().confining
    assert not constant(1.0).confining and not affine([1.0]).confining
    assert polynomial([0, 0, 0, 0, 1]).confining and not polynomial([0, 0, 0, 1]).confining
    assert not polynomial([0, 0, -1]).confining
    assert expression("x^2", 1).confining and not expression("x", 1).confining
    assert expression("x^2+y^4", 2).confining and not expression("x^2", 2).confining
    assert expression("0", 0, make_sphere(2, 0.5)).confining


def test_expression_uses_model_fields():
    c = make_cylinder(2, 1, 0.5)
    V = expression("f/(4*tau)", 1, c)
    f = eval_geometry(c, ([1.0, 0.0, 0.0], [2.0]))[0]
    assert eval_potential(V, ([1.0, 0.0, 0.0], [2.0]), c) == pytest.approx(f / 2.0)
    with pytest.raises(ExpressionError):
        expression("f", 1)
    with pytest.raises(ExpressionError):
        expression("q+1", 1)


def test_coordinate_names():
    V = expression("x + 10*y + 100*z", 3)
    assert eval_potential(V, [1.0, 2.0, 3.0]) == pytest.approx(321.0)
    assert eval_potential(expression("x1 - x2", 2), [5.0, 2.0]) == 3.0
    assert eval_potential(expression("y^2", 1), [3.0]) == 9.0


def test_tabulated_lookup():
    disc = line_grid(2.0, 5)
    x = disc.flat_coords[:, 0]
    V = tabulated(x, x**2, confining=True)
    g = make_gaussian(1, 0.25)
    assert np.array_equal(potential_samples(V, g, disc), x**2)
    assert eval_potential(V, [-0.0]) == 0.0
    with pytest.raises(TabulationMiss):
        eval_potential(V, [0.3])


def test_shift_keeps_family():
    for V in (constant(1.0), affine([1.0], 2.0), harmonic(stiffness=2.0), polynomial([1, 0, 1]),
              expression("x^2", 1)):
        W = shift(V, 1.5)
        pts = np.array([[-1.0], [0.3], [2.0]])
        assert np.allclose(W.evaluate(pts), V.evaluate(pts) + 1.5)
        assert W.confining == V.confining


@settings(max_examples=60, deadline=None)
@given(kind=st.sampled_from(["gaussian", "sphere", "cylinder"]), n=st.integers(1, 4), m=st.integers(2, 4),
       k=st.integers(1, 2), tau=st.floats(0.05, 5.0), coords=st.lists(st.floats(-20, 20), min_size=16, max_size=16))
def test_shrinker_identities(kind, n, m, k, tau, coords):
    sh = {"gaussian": lambda: make_gaussian(n, tau), "sphere": lambda: make_sphere(n + 1, tau),
          "cylinder": lambda: make_cylinder(m, k, tau)}[kind]()
    d = sh.flat_dim
    pts = np.asarray(coords[: 4 * d], dtype=float).reshape(4, d) if d else None
    g = sh.fields(pts, count=4)
    scale = 1.0 + np.abs(g["f"]).max()
    assert np.abs(g["laplacian_f"] + g["R"] - sh.n / (2 * tau)).max() <= 1e-12 * (1 + sh.n / tau)
    ham = tau * (g["R"] + g["grad_f_sq"]) - g["f"]
    assert ham.max() - ham.min() <= 1e-12 * scale
    assert np.abs(-ham - sh.mu_s).max() <= 1e-12 * scale
    Rf = g["R"] + 2 * g["laplacian_f"] - g["grad_f_sq"]
    assert np.abs(sh.n - g["f"] - tau * Rf + sh.mu_s).max() <= 1e-12 * scale
