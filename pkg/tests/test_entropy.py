import math

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from shrinker_spectra.entropy import (MetricData, euler_lagrange_residual, gibbs_objective, gibbs_trials,
                                      gibbs_value, k_functional, log_sobolev_deficit, model_density,
                                      shrinker_entropy, w_functional)
from shrinker_spectra.errors import ConstraintError, ParameterError
from shrinker_spectra.grid import fd_hessian_norm, line_grid, log_density, model_grid
from shrinker_spectra.models import make_cylinder, make_gaussian, make_sphere

LN2_M1 = math.log(2.0) - 1.0


def test_closed_forms():
    assert shrinker_entropy(make_gaussian(3, 0.7)) == 0.0
    assert abs(shrinker_entropy(make_sphere(2, 0.5)) - LN2_M1) <= 1e-15
    assert abs(shrinker_entropy(make_cylinder(2, 1, 2.0)) - LN2_M1) <= 1e-15
    # scale invariance: the sphere value does not depend on tau
    assert shrinker_entropy(make_sphere(3, 0.1)) == pytest.approx(shrinker_entropy(make_sphere(3, 4.0)), abs=1e-14)


def test_w_at_model_potential():
    g = make_gaussian(1, 0.25)
    disc = line_grid(8.0, 641)
    assert abs(w_functional(disc, g, g.sample(disc)["f"], g.tau).value) <= disc.h**2
    s = make_sphere(2, 0.5)
    sd = model_grid(s, level=5)
    defect = math.log(sd.weights.sum() / (4 * math.pi))  # O(h^2) area error of the mesh
    f = s.sample(sd)["f"] + defect
    assert abs(defect) <= 5e-4
    assert w_functional(sd, s, f, s.tau).value == pytest.approx(LN2_M1 + defect, abs=1e-12)


def test_terms_sum_to_value():
    g = make_gaussian(1, 0.25)
    disc = line_grid(8.0, 161)
    rep = k_functional(disc, model_density(disc, g), g.tau, g)
    assert rep.value == pytest.approx(sum(rep.terms.values()), abs=1e-15)
    assert set(rep.terms) == {"dirichlet", "curvature", "entropy", "constant"}
    assert rep.to_dict()["value"] == rep.value


def test_w_equals_k_for_any_f():
    rng = np.random.default_rng(11)
    disc = line_grid(6.0, 121)
    metric = MetricData(n=1, R=0.3)
    for tau in (0.1, 0.25, 2.0):
        for _ in range(5):
            f = 0.5 * disc.flat_coords[:, 0] ** 2 + rng.standard_normal(disc.n_nodes)
            f += math.log(float(disc.weights @ np.exp(-f))) - 0.5 * math.log(4 * math.pi * tau)
            phi = np.sqrt((4 * math.pi * tau) ** -0.5 * np.exp(-f))
            w = w_functional(disc, metric, f, tau).value
            k = k_functional(disc, phi, tau, metric).value
            assert abs(w - k) <= 1e-10 * (1 + abs(w))


def test_k_above_entropy_and_second_order():
    g = make_gaussian(1, 0.25)
    disc = line_grid(8.0, 1601)
    x = disc.flat_coords[:, 0]
    phi = model_density(disc, g)
    base = k_functional(disc, phi, g.tau, g).value

    def perturbed(eps):
        p = phi * (1 + eps * np.sin(x))
        p /= math.sqrt(float(disc.weights @ (p * p)))
        return k_functional(disc, p, g.tau, g).value - base

    d1, d2 = perturbed(0.05), perturbed(0.1)
    assert d1 > 0 and d2 > 0
    assert d2 / d1 == pytest.approx(4.0, rel=0.02)
    rng = np.random.default_rng(2)
    for _ in range(10):
        p = np.exp(-rng.uniform(0.2, 2.0) * (x - rng.normal()) ** 2)
        p /= math.sqrt(float(disc.weights @ (p * p)))
        assert k_functional(disc, p, g.tau, g).value >= -disc.h**2


def test_functional_constraints():
    disc = line_grid(4.0, 81)
    g = make_gaussian(1, 0.25)
    with pytest.raises(ConstraintError):
        w_functional(disc, g, g.sample(disc)["f"] + 1.0, g.tau)
    with pytest.raises(ConstraintError):
        k_functional(disc, -model_density(disc, g), g.tau, g)
    with pytest.raises(ConstraintError):
        k_functional(disc, 2 * model_density(disc, g), g.tau, g)
    with pytest.raises(ParameterError):
        k_functional(disc, np.ones(3), g.tau, g)


def test_zero_log_zero():
    disc = line_grid(4.0, 81)
    g = make_gaussian(1, 0.25)
    phi = model_density(disc, g)
    phi[:10] = 0.0
    phi /= math.sqrt(float(disc.weights @ (phi * phi)))
    assert math.isfinite(k_functional(disc, phi, g.tau, g).value)


def test_gibbs_examples():
    value, dens = gibbs_value([0.5, 0.5], [0.0, 0.0], 1.0)
    assert value == 0.0 and np.allclose(dens, [1.0, 1.0])
    for a in (0.3, 2.0):
        value, dens = gibbs_value([0.5, 0.5], [0.0, a], 1.0)
        assert value == pytest.approx(-math.log((1 + math.exp(-a)) / 2), rel=1e-14)
        # brute force over u^2 = (2s, 2(1-s)), the admissible set of the two-point measure
        best = minimize_scalar(lambda s: gibbs_objective([0.5, 0.5], [0.0, a], 1.0, [2 * s, 2 * (1 - s)]),
                               bounds=(0.0, 1.0), method="bounded", options={"xatol": 1e-12})
        assert best.fun == pytest.approx(value, abs=1e-9)
        assert gibbs_objective([0.5, 0.5], [0.0, a], 1.0, dens) == pytest.approx(value, abs=1e-14)


def test_gibbs_overflow_guard():
    value, dens = gibbs_value([1.0, 1.0], [-2000.0, 0.0], 1.0)
    assert value == pytest.approx(-2000.0) and np.all(np.isfinite(dens))
    with pytest.raises(ParameterError):
        gibbs_value([1.0], [0.0], 0.0)
    with pytest.raises(ParameterError):
        gibbs_value([0.0, 0.0], [0.0, 1.0], 1.0)


def test_gibbs_suite():
    out = gibbs_trials(200, seed=5)
    assert out["violations"] == 0 and out["max_equality_error"] <= 1e-12
    assert gibbs_trials(50, seed=5) == gibbs_trials(50, seed=5)


def test_log_sobolev_examples():
    g = make_gaussian(1, 0.25)
    disc = line_grid(8.0, 1601)
    x = disc.flat_coords[:, 0]
    mu = disc.weights * np.exp(-x * x) / math.sqrt(math.pi)
    one = np.ones(disc.n_nodes) / math.sqrt(mu.sum())
    assert abs(log_sobolev_deficit(disc, g, one)) <= 1e-12
    bump = np.exp(-4 * (x - 1) ** 2)
    bump /= math.sqrt(float(mu @ (bump * bump)))
    assert log_sobolev_deficit(disc, g, bump) > 0.1
    for b in (0.5, 1.0):
        u = np.exp(0.5 * (b * x - g.tau * b * b))
        u /= math.sqrt(float(mu @ (u * u)))
        assert abs(log_sobolev_deficit(disc, g, u)) <= 10 * g.tau * b * b * disc.h**2
        assert fd_hessian_norm(disc, np.log(u * u)) <= 1e-9
    with pytest.raises(ConstraintError):
        log_sobolev_deficit(disc, g, 2 * one)


def test_log_sobolev_on_sphere_and_cylinder():
    for sh, disc in ((make_sphere(2, 0.5), model_grid(make_sphere(2, 0.5), level=4)),
                     (make_cylinder(2, 1, 0.5), model_grid(make_cylinder(2, 1, 0.5), 6.0, 61, 2))):
        rng = np.random.default_rng(4)
        mu = disc.weights * np.exp(log_density(disc, sh))
        z = disc.sphere_coords[:, 2] / np.linalg.norm(disc.sphere_coords, axis=1)
        # the mesh area defect shifts the entropy of u = const by about |1 - mass|
        slack = 2 * abs(1 - mu.sum())
        for _ in range(5):
            u = np.exp(0.5 * rng.standard_normal() * z)
            u /= math.sqrt(float(mu @ (u * u)))
            assert log_sobolev_deficit(disc, sh, u) >= -slack


def test_euler_lagrange():
    g = make_gaussian(1, 0.25)
    errs = []
    for N in (161, 321):
        disc = line_grid(8.0, N)
        errs.append(euler_lagrange_residual(disc, g, g.sample(disc)["f"], g.tau))
    assert errs[-1] <= 1e-10 or errs[0] / errs[1] >= 3.5
    disc = line_grid(8.0, 321)
    x = disc.flat_coords[:, 0]
    f = g.sample(disc)["f"]
    # a linear perturbation is a translate of f: still a critical point
    assert euler_lagrange_residual(disc, g, f + 0.3 * x, g.tau) <= 1e-9
    assert euler_lagrange_residual(disc, g, f + 0.1 * x**3, g.tau) > 1.0
    s = make_sphere(2, 0.5)
    sd = model_grid(s, level=3)
    assert euler_lagrange_residual(sd, s, s.sample(sd)["f"], s.tau) <= 1e-12
